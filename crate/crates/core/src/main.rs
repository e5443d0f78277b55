use std::io;

fn main() {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = crep::cli::main_with(std::env::args(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
