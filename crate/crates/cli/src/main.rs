fn main() {
    std::process::exit(gelfand_cli::main_with(std::env::args_os()));
}
