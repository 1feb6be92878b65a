fn main() {
    std::process::exit(ginexpm_cli::run(std::env::args_os()));
}
