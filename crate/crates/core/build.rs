fn main() {
    // LAPACK (zggev/zgeev/zgesvd) comes from the system OpenBLAS.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
