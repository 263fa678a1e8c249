fn main() {
    std::process::exit(isothermic::cli::run(std::env::args_os()));
}
