fn main() {
    std::process::exit(wifi_respiration::cli::main_with_args(std::env::args_os()));
}
