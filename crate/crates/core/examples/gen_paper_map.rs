//! Prints the formula map; pipe into docs/paper-map.md to regenerate it.

fn main() {
    print!("{}", imisac_core::trace::generate_trace_table());
}
