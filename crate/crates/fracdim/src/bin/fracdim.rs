use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    // FRACDIM_THREADS caps the rayon worker count; unset or invalid values
    // leave the default (one worker per logical CPU).
    if let Ok(text) = std::env::var("FRACDIM_THREADS") {
        match text.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("warning: ignoring FRACDIM_THREADS={text:?} (expected a positive integer)");
            }
        }
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = fracdim::cli::run(&args, &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
