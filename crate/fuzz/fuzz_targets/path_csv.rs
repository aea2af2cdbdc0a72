#![no_main]

use glevy_core::paths::io::{read_csv, write_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(path) = read_csv(data) else { return };
    // accepted paths survive a round trip bit for bit
    let text = write_csv(&path).expect("accepted path must serialise");
    assert_eq!(read_csv(&text).expect("own output must parse"), path);
});
