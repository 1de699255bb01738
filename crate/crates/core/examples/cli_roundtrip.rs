// Drive the `provkit` command line in-process: ingest a capture log,
// export, emit a header file, scan it back in.
//
// ```bash
// cargo run --example cli_roundtrip
// ```

use std::fs;

use provkit::cli::run;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

const LOG: &str = r#"{"event":"agent","agent_id":"ex:lee","name":"Lee","kind":"Person"}
{"event":"entity","entity_id":"ex:raw","name":"raw frame","location":"file:///data/raw.fits"}
{"event":"entity","entity_id":"ex:lvl1","name":"calibrated frame"}
{"event":"activity_start","activity_id":"ex:calib","name":"calib","time":"2024-05-01T10:00:00Z"}
{"event":"used","activity_id":"ex:calib","entity_id":"ex:raw"}
{"event":"generated","activity_id":"ex:calib","entity_id":"ex:lvl1"}
{"event":"activity_end","activity_id":"ex:calib","time":"2024-05-01T10:05:00Z"}
{"event":"attribution","entity_id":"ex:lvl1","agent_id":"ex:lee","role":"contact"}
"#;

fn provkit(args: &[&str]) -> Result<String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("provkit").chain(args.iter().copied()), &mut out, &mut err);
    if code != 0 {
        return Err(format!("provkit {args:?} exited {code}: {}", String::from_utf8_lossy(&err)).into());
    }
    Ok(String::from_utf8(out)?)
}

pub fn run_example() -> Result<()> {
    let dir = tempfile::tempdir()?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    fs::write(path("run.provlog.jsonl"), LOG)?;
    fs::create_dir(path("headers"))?;

    let store = path("store");
    print!("ingest: {}", provkit(&["--store", &store, "ingest", &path("run.provlog.jsonl")])?);
    print!("{}", provkit(&["--store", &store, "export", "--id", "ex:lvl1", "--format", "prov-n"])?);
    provkit(&["--store", &store, "header", "emit", "--id", "ex:lvl1", "--out", &path("headers/lvl1.fits")])?;

    let rebuilt = path("rebuilt");
    print!("scan: {}", provkit(&["--store", &rebuilt, "header", "scan", &path("headers")])?);
    print!("{}", provkit(&["validate", &path("run.provlog.jsonl")])?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
