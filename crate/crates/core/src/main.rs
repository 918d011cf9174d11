fn main() {
    std::process::exit(tunnel_noise::cli::main_with_args(std::env::args_os()));
}
