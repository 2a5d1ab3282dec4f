fn main() {
    imdelab::discovery::retain_heap();
    let code = imdelab::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
