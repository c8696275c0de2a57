fn main() {
    std::process::exit(boltzgain::cli::main_with_args(std::env::args_os()));
}
