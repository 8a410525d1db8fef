fn main() {
    std::process::exit(tricoil::cli::run(std::env::args_os()));
}
