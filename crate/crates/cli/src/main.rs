fn main() {
    std::process::exit(flowgrowth::run(std::env::args_os()));
}
