fn main() {
    println!("envloc {}", envloc::version());
}
