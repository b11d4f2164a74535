fn main() {
    std::process::exit(mri_gark::cli::run(std::env::args_os()));
}
