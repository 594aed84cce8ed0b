// LAPACK symbols come from the system OpenBLAS; override the search path
// with AQRM_OPENBLAS_DIR when it lives outside the default linker paths.
fn main() {
    println!("cargo:rerun-if-env-changed=AQRM_OPENBLAS_DIR");
    if let Ok(dir) = std::env::var("AQRM_OPENBLAS_DIR") {
        println!("cargo:rustc-link-search=native={dir}");
    }
    println!("cargo:rustc-link-lib=dylib=openblas");
}
