fn main() {
    std::process::exit(parabolic_lab::lab::run(std::env::args_os()));
}
