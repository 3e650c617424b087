use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = truncexp::cli::run(std::env::args_os(), &mut out);
    let flushed = out.flush();
    match result {
        Ok(()) if flushed.is_ok() => {}
        Ok(()) => std::process::exit(3),
        Err(e) => {
            eprintln!("truncexp: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
