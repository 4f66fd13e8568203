fn main() {
    std::process::exit(kkmkit::run(std::env::args_os()));
}
