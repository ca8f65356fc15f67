fn main() {
    std::process::exit(covbvm::cli::main_with_args(std::env::args_os()));
}
