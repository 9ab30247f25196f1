#![no_main]

use libfuzzer_sys::fuzz_target;
use linksched::io::{parse_dimacs, parse_instance, write_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = parse_dimacs(text) {
        assert_eq!(inst.packets.len(), inst.topo.link_count());
        let again = parse_instance(&write_instance(&inst)).expect("written instances parse");
        assert_eq!(again, inst);
    }
});
