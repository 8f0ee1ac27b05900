fn main() {
    std::process::exit(hypergrad_bench::cli_main(std::env::args_os()));
}
