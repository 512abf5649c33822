fn main() {
    println!("znfree CLI placeholder");
}
