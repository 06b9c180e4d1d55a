fn main() {
    std::process::exit(qcnn_cli::run_cli(std::env::args_os()));
}
