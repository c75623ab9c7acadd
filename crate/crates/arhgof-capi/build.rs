use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("arhgof.h");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("ARHGOF_H".into()),
        cpp_compat: true,
        documentation: true,
        header: Some("/* C interface for the arhgof library. Generated; do not edit. */".into()),
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation")
        .write_to_file(header);
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
}
