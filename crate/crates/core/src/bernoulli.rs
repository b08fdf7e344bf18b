include!(concat!(env!("OUT_DIR"), "/bernoulli_table.rs"));

/// `B_{2m} / (2m)!` for m = 1 ..= 30.
pub(crate) fn scaled_even(m: usize) -> f64 {
    SCALED_EVEN[m - 1]
}

static SCALED_EVEN: std::sync::LazyLock<[f64; 30]> = std::sync::LazyLock::new(|| {
    let mut out = [0.0; 30];
    let mut fact = 1.0f64;
    let mut n = 0usize;
    for (m, slot) in out.iter_mut().enumerate() {
        let target = 2 * (m + 1);
        while n < target {
            n += 1;
            fact *= n as f64;
        }
        *slot = BERNOULLI[target] / fact;
    }
    out
});
