fn main() {
    std::process::exit(conequant_cli::run_from(std::env::args_os()));
}
