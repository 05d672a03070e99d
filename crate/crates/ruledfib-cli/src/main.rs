fn main() {
    // Subcommands are wired up once the library surface is complete.
}
