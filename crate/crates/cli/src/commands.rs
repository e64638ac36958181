//! Subcommand implementations. Each returns its parameters and a report.

use crate::input::{self, parse_group, parse_vertex, InputError, InputResult};
use crate::{Command, FactorKind, ScalarArg, Settings, Source, Variant};
use cubic_core::abelian::FiniteAbelianGroup;
use cubic_core::coupling::{is_idempotent, recover_factor, relative_square, Coupling};
use cubic_core::cube::Vertex;
use cubic_core::cubic::{
    verify_automorphism_invariance, verify_axioms_v1, verify_axioms_v2, verify_face_locality, verify_keybot,
    verify_outer_point, verify_simplicial_cis, verify_tricube_symmetry, CubicCoupling,
};
use cubic_core::exchange::{
    consistency_report, exact_consistency, exact_face_independence, independence_report, is_cubic_convergent,
    pattern_density, sample_zeta, zeta_window_law, Pattern,
};
use cubic_core::host_kra::{hk_factor, host_kra_coupling, FilteredAction};
use cubic_core::measure::Partition;
use cubic_core::report::{Check, Report, Verdict};
use cubic_core::scalar::{fmt_q, parse_q, ExactComplex, Scalar};
use cubic_core::uniformity::{display_root, fourier_factor, fourier_meet_with_factor, u_convolution, u_seminorm_pow};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

/// Default dimension cap for cube levels.
pub const DEFAULT_NMAX: usize = 3;
/// Default atom cap when a coupling is built.
pub const DEFAULT_COUPLING_ATOMS: usize = 16;
/// Default group-order cap for density-only paths.
pub const DEFAULT_DENSITY_ORDER: usize = 64;
/// Default sample cap for the sampler.
pub const DEFAULT_MAX_SAMPLES: usize = 1_000_000;

pub struct Outcome {
    pub params: BTreeMap<String, Value>,
    pub report: Report,
}

struct Params(BTreeMap<String, Value>);

impl Params {
    fn new() -> Self {
        Params(BTreeMap::new())
    }

    fn set(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), v.into());
        self
    }

    fn path(self, key: &str, p: &Path) -> Self {
        self.set(key, p.display().to_string())
    }

    fn done(self, report: Report) -> InputResult<Outcome> {
        Ok(Outcome { params: self.0, report })
    }
}

fn limit(settings: &Settings, what: &str, value: usize, cap: usize) -> InputResult<()> {
    if !settings.unsafe_caps && value > cap {
        return Err(InputError(format!("{} = {} exceeds the default cap {}; pass --unsafe to override", what, value, cap)));
    }
    Ok(())
}

fn single(check: Check) -> Report {
    let mut r = Report::new();
    r.push(check);
    r
}

fn blocks_value(p: &Partition) -> Value {
    json!(p.blocks())
}

fn measure_value(mu: &Coupling) -> Value {
    Value::Array(mu.iter().map(|(t, m)| json!([t, fmt_q(m)])).collect())
}

/// A parsed `--group` or `--system` source.
enum Built {
    Group(FiniteAbelianGroup),
    System(FilteredAction),
}

fn built_source(src: &Source, settings: &Settings) -> InputResult<(Built, Params)> {
    match (&src.group, &src.system) {
        (Some(g), None) => {
            let group = parse_group(g)?;
            limit(settings, "group order", group.order() as usize, DEFAULT_COUPLING_ATOMS)?;
            Ok((Built::Group(group.clone()), Params::new().set("group", json!(group.orders()))))
        }
        (None, Some(path)) => {
            let action = input::read_system(path)?;
            limit(settings, "atoms", action.space().len(), DEFAULT_COUPLING_ATOMS)?;
            Ok((Built::System(action), Params::new().path("system", path)))
        }
        _ => Err(InputError("exactly one of --group or --system is required".into())),
    }
}

fn cubic_of(built: &Built, horizon: usize) -> InputResult<CubicCoupling> {
    Ok(match built {
        Built::Group(g) => CubicCoupling::standard(g, horizon),
        Built::System(a) => host_kra_coupling(a, horizon)?,
    })
}

pub fn run(cmd: &Command, settings: &Settings) -> InputResult<Outcome> {
    match cmd {
        Command::Gowers { group, function, degree } => match settings.scalar {
            ScalarArg::Exact => gowers::<ExactComplex>(group, function, *degree, settings),
            ScalarArg::Float => gowers::<Complex64>(group, function, *degree, settings),
        },
        Command::Convolve { group, functions, degree } => match settings.scalar {
            ScalarArg::Exact => convolve::<ExactComplex>(group, functions, *degree, settings),
            ScalarArg::Float => convolve::<Complex64>(group, functions, *degree, settings),
        },
        Command::Density { group, function, k, plain, conjugated, sequence, eps } => {
            let args = DensityArgs { group, function, k: *k, plain, conjugated, sequence, eps };
            match settings.scalar {
                ScalarArg::Exact => density::<ExactComplex>(&args, settings),
                ScalarArg::Float => density::<Complex64>(&args, settings),
            }
        }
        Command::VerifyAxioms { source, nmax, variant } => verify_axioms(source, *nmax, *variant, settings),
        Command::VerifyDerived { source, nmax } => verify_derived(source, *nmax, settings),
        Command::HostKra { system, nmax, function, degree } => host_kra(system, *nmax, function.as_deref(), *degree, settings),
        Command::Factor { source, degree, kind } => factor(source, *degree, *kind, settings),
        Command::Idempotence { coupling, partition } => idempotence(coupling.as_deref(), partition.as_deref()),
        Command::SampleZeta { kernel, window, samples, seed, batch } => sample(kernel, *window, *samples, *seed, batch, settings),
        Command::TestExchangeable { batch, kernel, window, alphabet, k, seed } => {
            test_exchangeable(batch.as_deref(), kernel.as_deref(), *window, *alphabet, *k, *seed, settings)
        }
    }
}

fn gowers<S: Scalar>(group: &str, function: &Path, d: usize, settings: &Settings) -> InputResult<Outcome> {
    let g = parse_group(group)?;
    limit(settings, "group order", g.order() as usize, DEFAULT_COUPLING_ATOMS)?;
    limit(settings, "degree", d, DEFAULT_NMAX)?;
    let f = input::read_function::<S>(function, g.order() as usize)?;
    let cc = CubicCoupling::standard(&g, d);
    let pow = u_seminorm_pow(&cc, d, &f)?;
    let check = Check::new("gowers", Verdict::Pass)
        .value("u_norm_pow", pow.to_value())
        .value("u_norm", cubic_core::scalar::float_value(display_root(&pow, d)));
    Params::new().set("group", json!(g.orders())).path("function", function).set("degree", d).done(single(check))
}

fn convolve<S: Scalar>(group: &str, functions: &Path, d: usize, settings: &Settings) -> InputResult<Outcome> {
    let g = parse_group(group)?;
    limit(settings, "group order", g.order() as usize, DEFAULT_COUPLING_ATOMS)?;
    limit(settings, "degree", d, DEFAULT_NMAX)?;
    let fs = input::read_functions::<S>(functions, g.order() as usize)?;
    let cc = CubicCoupling::standard(&g, d);
    let conv = u_convolution(&cc, d, &fs)?;
    let check = Check::new("convolution", Verdict::Pass).value("values", conv.values.iter().map(|v| v.to_value()).collect::<Vec<_>>());
    Params::new().set("group", json!(g.orders())).path("functions", functions).set("degree", d).done(single(check))
}

struct DensityArgs<'a> {
    group: &'a Option<String>,
    function: &'a Option<std::path::PathBuf>,
    k: Option<usize>,
    plain: &'a Option<String>,
    conjugated: &'a Option<String>,
    sequence: &'a Option<std::path::PathBuf>,
    eps: &'a str,
}

fn vertex_list(arg: &str, flag: &str) -> InputResult<Vec<Vertex>> {
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_vertex(s).ok_or_else(|| InputError(format!("{}: `{}` is not a vertex bit string", flag, s))))
        .collect()
}

fn pattern_of(args: &DensityArgs) -> InputResult<Pattern> {
    if args.plain.is_none() && args.conjugated.is_none() {
        let k = args.k.ok_or_else(|| InputError("--k is required for the even/odd pattern".into()))?;
        return Ok(Pattern::even_odd(k)?);
    }
    let plain = args.plain.as_deref().map(|s| vertex_list(s, "--plain")).transpose()?.unwrap_or_default();
    let conj = args.conjugated.as_deref().map(|s| vertex_list(s, "--conjugated")).transpose()?.unwrap_or_default();
    let k = args.k.or_else(|| plain.iter().chain(&conj).next().map(|v| v.dim)).unwrap_or(0);
    Pattern::new(k, plain, conj).map_err(|e| InputError(format!("pattern: {}", e)))
}

fn density<S: Scalar>(args: &DensityArgs, settings: &Settings) -> InputResult<Outcome> {
    let pattern = pattern_of(args)?;
    limit(settings, "pattern dimension", pattern.k, DEFAULT_NMAX)?;
    let fmt_vs = |vs: &[Vertex]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>();
    let params = Params::new().set("k", pattern.k).set("plain", fmt_vs(&pattern.plain)).set("conjugated", fmt_vs(&pattern.conjugated));
    if let Some(seq_path) = args.sequence {
        let seq = input::read_sequence::<S>(seq_path)?;
        for (g, _) in &seq {
            limit(settings, "group order", g.order() as usize, DEFAULT_DENSITY_ORDER)?;
        }
        let eps = parse_q(args.eps).ok_or_else(|| InputError(format!("--eps: `{}` is not a rational", args.eps)))?;
        let report = is_cubic_convergent(&seq, &[pattern], &eps)?;
        return params.path("sequence", seq_path).set("eps", fmt_q(&eps)).done(report);
    }
    let (Some(group), Some(function)) = (args.group, args.function) else {
        return Err(InputError("density needs --group and --function, or --sequence".into()));
    };
    let g = parse_group(group)?;
    limit(settings, "group order", g.order() as usize, DEFAULT_DENSITY_ORDER)?;
    let f = input::read_function::<S>(function, g.order() as usize)?;
    let t = pattern_density(&g, &f, &pattern)?;
    let check = Check::new("pattern_density", Verdict::Pass).value("density", t.to_value());
    params.set("group", json!(g.orders())).path("function", function).done(single(check))
}

fn verify_axioms(src: &Source, nmax: usize, variant: Variant, settings: &Settings) -> InputResult<Outcome> {
    limit(settings, "nmax", nmax, DEFAULT_NMAX)?;
    let (built, params) = built_source(src, settings)?;
    let cc = cubic_of(&built, nmax)?;
    let mut report = Report::new();
    let mut tagged = |r: Report, v: &'static str| r.checks.into_iter().for_each(|c| report.push(c.param("axioms", v)));
    if matches!(variant, Variant::V1 | Variant::Both) {
        tagged(verify_axioms_v1(&cc, nmax)?, "v1");
    }
    if matches!(variant, Variant::V2 | Variant::Both) {
        tagged(verify_axioms_v2(&cc, nmax)?, "v2");
    }
    let variant = match variant {
        Variant::V1 => "v1",
        Variant::V2 => "v2",
        Variant::Both => "both",
    };
    params.set("nmax", nmax).set("variant", variant).done(report)
}

fn verify_derived(src: &Source, nmax: usize, settings: &Settings) -> InputResult<Outcome> {
    limit(settings, "nmax", nmax, DEFAULT_NMAX)?;
    let (built, params) = built_source(src, settings)?;
    let cc = cubic_of(&built, nmax.max(2))?;
    let mut report = Report::new();
    for n in 1..=nmax.min(3) {
        report.extend(verify_simplicial_cis(&cc, n)?);
    }
    report.extend(verify_tricube_symmetry(&cc, 1)?);
    report.extend(verify_outer_point(&cc, 1)?);
    for n in 1..=nmax {
        report.extend(verify_face_locality(&cc, n)?);
        report.extend(verify_automorphism_invariance(&cc, n)?);
    }
    for d in 0..=nmax.min(3) {
        report.extend(verify_keybot(&cc, d)?);
    }
    for d in 1..=nmax {
        let ok = fourier_meet_with_factor(&cc, d)?;
        report.push(Check::from_witness("fourier_meet", if ok { None } else { Some(format!("level {}", d)) }).param("d", d));
    }
    params.set("nmax", nmax).done(report)
}

fn host_kra(system: &Path, nmax: usize, function: Option<&Path>, degree: Option<usize>, settings: &Settings) -> InputResult<Outcome> {
    limit(settings, "nmax", nmax, DEFAULT_NMAX)?;
    let action = input::read_system(system)?;
    limit(settings, "atoms", action.space().len(), DEFAULT_COUPLING_ATOMS)?;
    let horizon = nmax.max(degree.unwrap_or(0));
    limit(settings, "degree", horizon, DEFAULT_NMAX)?;
    let cc = host_kra_coupling(&action, horizon)?;
    let mut report = Report::new();
    report.push(Check::new("system", Verdict::Pass).value("ergodic", action.is_ergodic()).value("degree", action.degree()));
    for n in 0..=nmax {
        let mu = cc.level(n)?;
        report.push(
            Check::new("host_kra_level", Verdict::Pass)
                .param("n", n)
                .value("support_size", mu.support_size())
                .value("measure", measure_value(&mu)),
        );
    }
    let mut params = Params::new().path("system", system).set("nmax", nmax);
    if let (Some(path), Some(d)) = (function, degree) {
        let f = input::read_function::<ExactComplex>(path, action.space().len())?;
        let pow = u_seminorm_pow(&cc, d, &f)?;
        report.push(
            Check::new("hk_seminorm", Verdict::Pass)
                .param("degree", d)
                .value("u_norm_pow", pow.to_value())
                .value("u_norm", cubic_core::scalar::float_value(display_root(&pow, d))),
        );
        params = params.path("function", path).set("degree", d);
    }
    params.done(report)
}

fn factor(src: &Source, degree: usize, kind: FactorKind, settings: &Settings) -> InputResult<Outcome> {
    let (built, params) = built_source(src, settings)?;
    let (p, kind_name) = match kind {
        FactorKind::Fourier => {
            limit(settings, "degree", degree, DEFAULT_NMAX)?;
            (fourier_factor(&cubic_of(&built, degree)?, degree)?, "fourier")
        }
        FactorKind::HostKra => {
            limit(settings, "degree", degree + 1, DEFAULT_NMAX)?;
            let Built::System(action) = &built else {
                return Err(InputError("--kind host-kra needs --system".into()));
            };
            (hk_factor(action, degree)?, "host-kra")
        }
    };
    let check = Check::new("factor", Verdict::Pass).value("blocks", blocks_value(&p)).value("num_blocks", p.num_blocks());
    params.set("degree", degree).set("kind", kind_name).done(single(check))
}

fn idempotence(coupling: Option<&Path>, partition: Option<&Path>) -> InputResult<Outcome> {
    let (mu, params) = match (coupling, partition) {
        (Some(path), None) => (input::read_coupling(path)?, Params::new().path("coupling", path)),
        (None, Some(path)) => {
            let (space, p) = input::read_partition(path)?;
            (relative_square(&space, &p)?, Params::new().path("partition", path))
        }
        _ => return Err(InputError("exactly one of --coupling or --partition is required".into())),
    };
    let ok = is_idempotent(&mu)?;
    let mut check = Check::from_witness("idempotence", if ok { None } else { Some("glued subcoupling differs from the input".into()) })
        .value("measure", measure_value(&mu));
    if ok {
        check = check.value("factor", blocks_value(&recover_factor(&mu)?));
    }
    params.done(single(check))
}

fn sample(kernel: &Path, window: usize, n_samples: usize, seed: u64, batch: &Path, settings: &Settings) -> InputResult<Outcome> {
    limit(settings, "window", window, DEFAULT_NMAX)?;
    limit(settings, "samples", n_samples, DEFAULT_MAX_SAMPLES)?;
    let k = input::read_kernel(kernel)?;
    limit(settings, "group order", k.group().order() as usize, DEFAULT_DENSITY_ORDER)?;
    let b = sample_zeta(&k, window, n_samples, seed)?;
    input::write_batch(batch, &b)?;
    let mut counts = vec![0u64; k.alphabet()];
    b.samples.iter().flatten().for_each(|&y| counts[y as usize] += 1);
    let check = Check::new("sample_zeta", Verdict::Pass).value("samples", b.samples.len()).value("symbol_counts", counts);
    Params::new()
        .path("kernel", kernel)
        .set("window", window)
        .set("samples", n_samples)
        .set("seed", seed)
        .path("batch", batch)
        .done(single(check))
}

fn test_exchangeable(
    batch: Option<&Path>,
    kernel: Option<&Path>,
    window: usize,
    alphabet: Option<usize>,
    k: usize,
    seed: u64,
    settings: &Settings,
) -> InputResult<Outcome> {
    match (batch, kernel) {
        (Some(path), None) => {
            let b = input::read_batch(path, alphabet, seed)?;
            limit(settings, "window", b.n, DEFAULT_NMAX)?;
            let mut report = consistency_report(&b, k)?;
            report.extend(independence_report(&b)?);
            Params::new().path("batch", path).set("k", k).set("seed", seed).set("window", b.n).done(report)
        }
        (None, Some(path)) => {
            limit(settings, "window", window, 2)?;
            let kern = input::read_kernel(path)?;
            let levels = (0..=window).map(|m| zeta_window_law(&kern, m)).collect::<cubic_core::Result<Vec<_>>>()?;
            let mut report = exact_consistency(&levels)?;
            for (n, level) in levels.iter().enumerate().skip(1) {
                report.extend(exact_face_independence(level, n)?);
            }
            Params::new().path("kernel", path).set("window", window).set("mode", "exact").done(report)
        }
        _ => Err(InputError("exactly one of --batch or --kernel is required".into())),
    }
}
