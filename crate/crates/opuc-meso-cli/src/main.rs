fn main() {
    std::process::exit(opuc_meso_cli::run(std::env::args_os()));
}
