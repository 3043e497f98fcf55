fn main() {
    std::process::exit(kroncoef::pipeline::run_cli(std::env::args_os()));
}
