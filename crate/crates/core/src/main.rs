use std::io::Write;

fn main() {
    let (status, text) = epicomp::cli::execute(std::env::args_os());
    let mut out: Box<dyn Write> = if status == epicomp::cli::ExitStatus::Error {
        Box::new(std::io::stderr())
    } else {
        Box::new(std::io::stdout())
    };
    let _ = out.write_all(text.as_bytes());
    std::process::exit(status.code());
}
