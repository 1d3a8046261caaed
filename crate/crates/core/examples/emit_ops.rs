//! Regenerates the operator files under ops/ from the built-in catalog.
//!
//! Run from anywhere in the workspace:
//!     cargo run -p liouville-core --example emit_ops

use std::fs;
use std::path::Path;

use liouville_core::catalog;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../ops");
    fs::create_dir_all(&root).expect("create ops dir");
    for (name, op) in catalog::bundled() {
        let path = root.join(format!("{name}.json"));
        fs::write(&path, op.to_json_string() + "\n").expect("write operator file");
        println!("wrote {}", path.display());
    }
}
