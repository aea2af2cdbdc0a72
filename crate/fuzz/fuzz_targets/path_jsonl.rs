#![no_main]

use glevy_core::paths::io::{read_jsonl, write_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(path) = read_jsonl(data) else { return };
    // accepted paths survive a round trip bit for bit
    let text = write_jsonl(&path).expect("accepted path must serialise");
    assert_eq!(read_jsonl(&text).expect("own output must parse"), path);
});
