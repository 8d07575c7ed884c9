//! Invariant suites behind `neutral-sampler verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use neutral_sampler::asymptotics::{rate_function, LogRatio};
use neutral_sampler::basis::{build_basis, generator, Basis};
use neutral_sampler::combinatorics::multinomial_constant;
use neutral_sampler::combinatorics::{enumerate_partitions, power_sum_labels};
use neutral_sampler::config::RunConfig;
use neutral_sampler::moments::{esf_monomial_moment, MutationRate};
use neutral_sampler::numeric::{format_rational, ratio, Float, Rational};
use neutral_sampler::polynomial::PowerSumPoly;
use neutral_sampler::sampling::{
    consistency_check, monomial_sampler_bruteforce, monomial_sampler_expansion,
    sampling_probability, FrequencyVector,
};
use neutral_sampler::transient::{sampling_expansion, TimePoint};

use crate::{CliError, CliResult};

const SUITES: [&str; 6] = [
    "orthogonality",
    "oracle",
    "normalization",
    "consistency",
    "transient",
    "rate-function",
];

const RANDOM_VECTORS: usize = 8;

struct Setup<'a> {
    config: &'a RunConfig,
    max_size: usize,
    theta: MutationRate,
    basis: Basis,
}

fn fail(msg: String) -> CliError {
    CliError::Run(format!("assertion failed: {msg}"))
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(fail(msg()))
    }
}

pub(crate) fn run(
    config: &RunConfig,
    suite: &str,
    max_size: usize,
    theta: &MutationRate,
) -> CliResult<()> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite {other:?}; expected one of {} or all",
                SUITES.join(", ")
            )))
        }
    };
    if max_size > config.caps.max_n {
        return Err(CliError::Limit(format!(
            "max_size {max_size} exceeds max_n = {}",
            config.caps.max_n
        )));
    }
    let setup = Setup {
        config,
        max_size,
        theta: theta.clone(),
        basis: build_basis(max_size, theta)?,
    };
    for name in names {
        match name {
            "orthogonality" => orthogonality(&setup)?,
            "oracle" => oracle(&setup)?,
            "normalization" => normalization(&setup)?,
            "consistency" => consistency(&setup)?,
            "transient" => transient(&setup)?,
            _ => rate(&setup)?,
        }
        println!("{name}: ok");
    }
    Ok(())
}

fn vectors(setup: &Setup) -> Vec<FrequencyVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(setup.config.seed);
    let atoms = setup.config.caps.max_atoms;
    let mut out = vec![FrequencyVector::pure_dust(), FrequencyVector::point_mass()];
    for i in 0..RANDOM_VECTORS {
        out.push(if i % 2 == 0 {
            FrequencyVector::random_full_mass(&mut rng, atoms)
        } else {
            FrequencyVector::random_with_dust(&mut rng, atoms)
        });
    }
    out
}

fn orthogonality(setup: &Setup) -> CliResult<()> {
    let els = setup.basis.elements();
    for (i, a) in els.iter().enumerate() {
        check(*a.norm2() > Rational::ZERO, || {
            format!("norm of ψ_{} is not positive", a.label())
        })?;
        for b in &els[..i] {
            let ip = setup.basis.inner_product(a.coeffs(), b.coeffs())?;
            check(ip == Rational::ZERO, || {
                format!(
                    "<ψ_{}, ψ_{}> = {} at θ = {}",
                    a.label(),
                    b.label(),
                    format_rational(&ip),
                    setup.theta
                )
            })?;
        }
    }
    Ok(())
}

fn oracle(setup: &Setup) -> CliResult<()> {
    let theta = setup.theta.value();
    for e in setup.basis.elements() {
        let m = Rational::from(e.label().size());
        let lambda = &m * (&m - Rational::ONE + theta) / Rational::from(2u8);
        let mut expected = PowerSumPoly::zero();
        expected.add_scaled(e.coeffs(), &-lambda);
        check(generator(e.coeffs(), theta) == expected, || {
            format!("ψ_{} is not a generator eigenfunction", e.label())
        })?;
    }
    for n in 2..=setup.max_size {
        for label in power_sum_labels(n) {
            let lf = generator(&PowerSumPoly::monomial(label.clone()), theta);
            let mean = setup.basis.inner_product(&lf, &PowerSumPoly::one())?;
            check(mean == Rational::ZERO, || {
                format!(
                    "stationary mean of Lφ_{label} is {}",
                    format_rational(&mean)
                )
            })?;
        }
    }
    let brute_n = setup.max_size.min(setup.config.caps.max_n);
    for x in vectors(setup) {
        for n in 1..=brute_n {
            for eta in enumerate_partitions(n)? {
                let brute = monomial_sampler_bruteforce(&eta, &x, &setup.config.caps)?;
                let fast = monomial_sampler_expansion(&eta, &x);
                check(brute == fast, || {
                    format!(
                        "p°_{eta} expansion {} differs from brute force {}",
                        format_rational(&fast),
                        format_rational(&brute)
                    )
                })?;
            }
        }
    }
    Ok(())
}

fn normalization(setup: &Setup) -> CliResult<()> {
    for x in vectors(setup) {
        for n in 1..=setup.max_size {
            let mut total = Rational::ZERO;
            for eta in enumerate_partitions(n)? {
                let p = sampling_probability(&eta, &x);
                check(p >= Rational::ZERO && p <= Rational::ONE, || {
                    format!("P({eta}) = {} outside [0, 1]", format_rational(&p))
                })?;
                total += p;
            }
            check(total == Rational::ONE, || {
                format!(
                    "sampling law for n = {n} sums to {}",
                    format_rational(&total)
                )
            })?;
        }
    }
    Ok(())
}

fn consistency(setup: &Setup) -> CliResult<()> {
    for x in vectors(setup) {
        for n in 2..=setup.max_size {
            let report = consistency_check(n, &x)?;
            check(report.consistent, || {
                format!(
                    "sampling laws for n = {n} and n = {} are inconsistent",
                    n - 1
                )
            })?;
        }
    }
    Ok(())
}

fn transient(setup: &Setup) -> CliResult<()> {
    let precision = setup.config.precision_bits;
    let tolerance = Float::from_parts(1.into(), -(precision as isize / 2));
    let times = [ratio(0, 1), ratio(1, 10), ratio(1, 1), ratio(5, 1)];
    for x in vectors(setup).into_iter().take(4) {
        for n in 1..=setup.max_size {
            let etas = enumerate_partitions(n)?;
            let expansions = etas
                .iter()
                .map(|eta| sampling_expansion(eta, &x, &setup.basis))
                .collect::<Result<Vec<_>, _>>()?;
            for (eta, e) in etas.iter().zip(&expansions) {
                let at_zero = sampling_probability(eta, &x);
                check(e.initial() == at_zero, || {
                    format!("transient P({eta}) at t = 0 differs from the sampling probability")
                })?;
                let stationary = multinomial_constant(eta) * esf_monomial_moment(eta, &setup.theta);
                check(e.stationary() == stationary, || {
                    format!("transient P({eta}) at t = ∞ differs from the Ewens probability")
                })?;
            }
            for t in &times {
                let tp = TimePoint::from_rational(t, setup.theta.clone(), precision)?;
                let mut total = Float::ZERO;
                for e in &expansions {
                    total += e.evaluate(&tp)?.upper().clone();
                }
                let err = total - Float::ONE;
                let err = if err < Float::ZERO { -err } else { err };
                check(err <= tolerance, || {
                    format!(
                        "transient law for n = {n} at t = {} misses 1 by {}",
                        format_rational(t),
                        err
                    )
                })?;
            }
        }
    }
    Ok(())
}

fn rate(setup: &Setup) -> CliResult<()> {
    let ks = [
        ratio(1, 4),
        ratio(1, 1),
        ratio(3, 2),
        ratio(2, 1),
        ratio(5, 1),
    ];
    for n in 1..=setup.max_size {
        for eta in enumerate_partitions(n)? {
            let nn = Rational::from(n);
            let flat = &nn - Rational::from(eta.len());
            for k in &ks {
                let got = rate_function(n, &eta, &LogRatio::Finite(k.clone()))?.value;
                let kinked =
                    (&nn - Rational::from(eta.singleton_count())) * k / Rational::from(2u8);
                let want = std::cmp::min(kinked, flat.clone());
                check(got == want, || {
                    format!(
                        "I({eta}; k = {}) = {}, expected {}",
                        format_rational(k),
                        format_rational(&got),
                        format_rational(&want)
                    )
                })?;
            }
            let at_inf = rate_function(n, &eta, &LogRatio::Infinite)?.value;
            check(at_inf == flat, || {
                format!("I({eta}; k = ∞) = {}", format_rational(&at_inf))
            })?;
        }
    }
    Ok(())
}
