//! Text forms of frequencies, counts and polynomials.

use anyhow::{anyhow, bail, Context, Result};
use modsig::algebra::PolynomialSpec;
use modsig::limits::FactorialFrequency;
use modsig::precision::{constants, Real};

/// A parsed frequency with the text it came from.
#[derive(Clone, Debug)]
pub struct Beta {
    pub label: String,
    pub real: Real,
    /// Set for `e` and `1/e`, which have exact factorial phases.
    pub factorial: Option<FactorialFrequency>,
}

fn tag(name: &str) -> Option<(Real, Option<FactorialFrequency>)> {
    let alg = |a| Some((Real::algebraic(a), None));
    match name {
        "phi" => alg(constants::phi()),
        "sqrt13_half" => alg(constants::sqrt13_half()),
        "one_plus_sqrt6" => alg(constants::one_plus_sqrt6()),
        "e" => Some((Real::E, Some(FactorialFrequency::E))),
        "inv_e" => Some((Real::InvE, Some(FactorialFrequency::InvE))),
        _ => {
            if let Some(d) = name.strip_prefix("alpha") {
                let d: usize = d.parse().ok()?;
                (1..=64).contains(&d).then(|| (Real::algebraic(constants::alpha(d)), None))
            } else if let Some(n) = name.strip_prefix("sqrt") {
                let n: i64 = n.parse().ok()?;
                (n > 0).then(|| (Real::algebraic(constants::sqrt(n)), None))
            } else {
                None
            }
        }
    }
}

/// Frequencies:
///
/// * `alg:<tag>` or `<tag>` with tag `alpha2..alpha64`, `phi`, `e`, `inv_e`,
///   `sqrt<n>`, `sqrt13_half`, `one_plus_sqrt6`, optionally `k*<tag>` or
///   `<tag>/q`;
/// * `p/q` or `rat:p/q`, an exact rational;
/// * `dec:<digits>:<bits>`, a decimal literal with its claimed precision.
pub fn parse_beta(text: &str) -> Result<Beta> {
    let label = text.to_string();
    if let Some(rest) = text.strip_prefix("dec:") {
        let (digits, bits) = rest
            .rsplit_once(':')
            .ok_or_else(|| anyhow!("decimal frequency needs an explicit precision: dec:<digits>:<bits>"))?;
        let bits: u32 = bits.parse().context("precision bits")?;
        if !(8..=100_000).contains(&bits) {
            bail!("precision {bits} bits outside 8..=100000");
        }
        return Ok(Beta {
            label,
            real: Real::decimal(digits, bits)?,
            factorial: None,
        });
    }
    let body = text.strip_prefix("rat:").or_else(|| text.strip_prefix("alg:")).unwrap_or(text);
    if let Some(r) = parse_rational(body) {
        return Ok(Beta {
            label,
            real: r,
            factorial: None,
        });
    }
    let (k, rest) = match body.split_once('*') {
        Some((k, rest)) => (k.parse::<i64>().context("multiplier")?, rest),
        None => (1, body),
    };
    let (name, q) = match rest.split_once('/') {
        Some((name, q)) => (name, q.parse::<i64>().context("divisor")?),
        None => (rest, 1),
    };
    if q == 0 {
        bail!("division by zero in `{text}`");
    }
    let (real, factorial) = tag(name).ok_or_else(|| anyhow!("unknown frequency `{text}`"))?;
    let plain = k == 1 && q == 1;
    Ok(Beta {
        label,
        real: if plain { real } else { real.times(Real::ratio(k, q)) },
        factorial: if plain { factorial } else { None },
    })
}

fn parse_rational(s: &str) -> Option<Real> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: i64 = p.trim().parse().ok()?;
    let q: i64 = q.trim().parse().ok()?;
    (q != 0).then(|| Real::ratio(p, q))
}

/// Counts: `10000`, `10_000`, `1e7`, `2.5e6` or `2^20`.
pub fn parse_count(text: &str) -> Result<usize> {
    let t = text.replace('_', "");
    let bad = || anyhow!("cannot read `{text}` as a count");
    if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return b
            .checked_pow(e)
            .and_then(|v| usize::try_from(v).ok())
            .ok_or_else(bad);
    }
    if let Ok(v) = t.parse::<usize>() {
        return Ok(v);
    }
    let x: f64 = t.parse().map_err(|_| bad())?;
    if x < 0.0 || x.fract() != 0.0 || x > 1e15 {
        return Err(bad());
    }
    Ok(x as usize)
}

/// Polynomials: `trinomial:<d>` for `x^d − x^{d−1} − 1`, `alpha:<d>` for
/// `x^d + x − 1`, or `coeffs:c0,c1,…` in ascending order.
pub fn parse_poly(text: &str) -> Result<PolynomialSpec> {
    let (kind, arg) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("polynomial `{text}`: expected trinomial:<d>, alpha:<d> or coeffs:<list>"))?;
    match kind {
        "trinomial" | "alpha" => {
            let d: usize = arg.parse().context("degree")?;
            if !(1..=256).contains(&d) {
                bail!("degree {d} outside 1..=256");
            }
            Ok(if kind == "trinomial" {
                PolynomialSpec::trinomial(d)
            } else {
                PolynomialSpec::alpha_polynomial(d)
            })
        }
        "coeffs" => {
            let c: Vec<i64> = arg
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .context("coefficient list")?;
            Ok(PolynomialSpec::from_i64(&c)?)
        }
        _ => bail!("unknown polynomial kind `{kind}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e7").unwrap(), 10_000_000);
        assert_eq!(parse_count("2^20").unwrap(), 1 << 20);
        assert_eq!(parse_count("10_000").unwrap(), 10_000);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn frequencies() {
        let a = parse_beta("alg:alpha3").unwrap().real.to_f64();
        assert!((a - 0.682_327_803_828_019_3).abs() < 1e-15);
        let third = parse_beta("alpha3/3").unwrap().real.to_f64();
        assert!((third - a / 3.0).abs() < 1e-15);
        assert!(parse_beta("inv_e").unwrap().factorial.is_some());
        assert!(parse_beta("2*inv_e").unwrap().factorial.is_none());
        assert_eq!(parse_beta("3/7").unwrap().real.to_f64(), 3.0 / 7.0);
        assert!(parse_beta("dec:1.41421356237").is_err());
        assert!(parse_beta("dec:1.41421356237:40").is_ok());
        assert!(parse_beta("pi").is_err());
    }

    #[test]
    fn polys() {
        assert_eq!(parse_poly("trinomial:3").unwrap().to_string(), "x^3 - x^2 - 1");
        assert_eq!(parse_poly("coeffs:-1,1,0,1").unwrap().degree(), 3);
        assert!(parse_poly("cubic").is_err());
    }
}
