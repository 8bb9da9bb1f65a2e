fn main() {
    std::process::exit(nnhm_cli::run(std::env::args_os()));
}
