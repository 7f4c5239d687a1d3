//! Coprime pairs (c, d) from the Stern–Brocot tree.

/// All (c, d) with gcd(c, d) = 1 and |c|, |d| ≤ bound, both signs, sorted.
pub fn coprime_pairs(bound: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    if bound < 1 {
        return out;
    }
    out.extend([(1, 0), (-1, 0), (0, 1), (0, -1)]);
    // Nodes are mediants of (left, right); both entries grow with depth.
    let mut stack = vec![((0i64, 1i64), (1i64, 0i64))];
    while let Some(((a, b), (c, d))) = stack.pop() {
        let (p, q) = (a + c, b + d);
        if p > bound || q > bound {
            continue;
        }
        out.extend([(p, q), (-p, q), (p, -q), (-p, -q)]);
        stack.push(((a, b), (p, q)));
        stack.push(((p, q), (c, d)));
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    #[test]
    fn matches_gcd_filter() {
        for bound in [1, 2, 7, 40] {
            let mut brute = Vec::new();
            for c in -bound..=bound {
                for d in -bound..=bound {
                    if c.gcd(&d) == 1 {
                        brute.push((c, d));
                    }
                }
            }
            assert_eq!(coprime_pairs(bound), brute, "bound {bound}");
        }
    }
}
