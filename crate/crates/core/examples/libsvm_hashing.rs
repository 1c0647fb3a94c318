//! Reading libsvm text with the hashing trick.
use svrg_ol::data::parse_libsvm_line_unhashed;
use svrg_ol::{hash_feature, Dataset};

const TEXT: &str = "\
+1 3:0.5 17:1 1000003:2
-1 2:1 5:-0.25
# comments and blank lines are skipped

+1 3:1
-1 17:0.5 99:2
";

fn main() -> svrg_ol::Result<()> {
    for raw in [3u64, 17, 1_000_003] {
        println!("feature {raw:>8} -> bucket {:>2} of 2^6", hash_feature(raw, 6));
    }

    let d = Dataset::from_libsvm_str(TEXT, 6)?;
    println!("{} examples in dimension {}", d.len(), d.dim());
    for e in d.examples() {
        println!("  y = {:+}  hashed: {}", e.y(), e.to_libsvm());
    }

    // the hashed form is canonical: read back without re-hashing it gives the same examples
    for (line, e) in d.to_libsvm().lines().zip(d.examples()) {
        assert_eq!(&parse_libsvm_line_unhashed(line, d.dim())?, e);
    }
    println!("roundtrip ok");
    Ok(())
}
