fn main() {
    // placeholder until the engine surface lands
    eprintln!("orbi: not yet wired");
    std::process::exit(2);
}
