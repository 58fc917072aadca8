fn main() {
    std::process::exit(hbts::cli::run(std::env::args_os()));
}
