fn main() {
    std::process::exit(mop_bench::cli::cli_main(std::env::args_os()));
}
