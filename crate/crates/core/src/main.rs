fn main() {
    std::process::exit(stratwave::expcli::cli_main(std::env::args_os()));
}
