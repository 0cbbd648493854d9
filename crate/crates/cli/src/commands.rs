use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sol_geo::curve::{self, CurveError, OdeOptions};
use sol_geo::export;
use sol_geo::field::{CatalogSurface, FieldError, ScalarField};
use sol_geo::frame::{CoordVector, Point};
use sol_geo::par;
use sol_geo::stability::{self, Bump, GraphPerturbation, PlaneKind, QOptions, SimplifiedKind, StabilityError, TestFunction};
use sol_geo::stationary::{self, Branch, HorizontalCurve, StationaryError};
use sol_geo::surface::{self, SurfaceError, Tolerances};

use crate::{
    AreaArgs, Cli, CliError, Command, CurveArgs, GammaKind, JacobiArgs, QformArgs, ResidualArgs, StabilityCommand,
    SufficientArgs, SurfaceArgs, SweepArgs,
};

type Res<T> = Result<T, CliError>;

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Syntax { .. } | FieldError::BadParams(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::Field(f) => f.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<StationaryError> for CliError {
    fn from(e: StationaryError) -> Self {
        match e {
            StationaryError::Field(f) => f.into(),
            StationaryError::BadRange(_) | StationaryError::BadParams(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::Field(f) => f.into(),
            StabilityError::Surface(s) => s.into(),
            StabilityError::Stationary(s) => s.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Internal(format!("cannot write {}: {e}", path.display()))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn execute(cli: &Cli) -> Res<Value> {
    match &cli.command {
        Command::Residual(a) => to_value(residual(a)?),
        Command::Curve(a) => to_value(curve_cmd(a)?),
        Command::Sweep(a) => to_value(sweep(a)?),
        Command::Stability { command } => match command {
            StabilityCommand::Qform(a) => to_value(qform(a)?),
            StabilityCommand::Sufficient(a) => to_value(sufficient(a)?),
            StabilityCommand::Area(a) => to_value(area(a)?),
            StabilityCommand::Jacobi(a) => to_value(jacobi(a)?),
        },
    }
}

fn to_value<T: Serialize>(t: T) -> Res<Value> {
    serde_json::to_value(t).map_err(|e| CliError::Internal(e.to_string()))
}

struct Resolved {
    field: ScalarField,
    catalog: Option<CatalogSurface>,
}

fn resolve_surface(s: &SurfaceArgs) -> Res<Resolved> {
    let (field, catalog) = match (&s.surface, &s.u) {
        (Some(name), None) => {
            let cat = CatalogSurface::from_name(name, &s.params)?;
            (cat.field(), Some(cat))
        }
        (None, Some(src)) => {
            if !s.params.is_empty() {
                return Err(usage("--params applies to catalog surfaces only"));
            }
            (ScalarField::parse(src)?, None)
        }
        _ => return Err(usage("give exactly one of --surface or --u")),
    };
    let field = if s.flip_orientation { field.negated() } else { field };
    Ok(Resolved { field, catalog })
}

fn point3(v: &[f64], name: &str) -> Res<Point> {
    match v {
        [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => Ok(Point::new(*x, *y, *z)),
        _ => Err(usage(format!("--{name} needs three finite numbers"))),
    }
}

fn range2(v: &[f64], name: &str) -> Res<[f64; 2]> {
    match v {
        [a, b] if a.is_finite() && b.is_finite() && a < b => Ok([*a, *b]),
        _ => Err(usage(format!("--{name} needs two finite numbers with min < max"))),
    }
}

fn window3(v: &[f64]) -> Res<[[f64; 2]; 3]> {
    if v.len() != 6 {
        return Err(usage("--window needs six numbers"));
    }
    Ok([range2(&v[0..2], "window")?, range2(&v[2..4], "window")?, range2(&v[4..6], "window")?])
}

fn positive(v: f64, name: &str) -> Res<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive")))
    }
}

// ---------------------------------------------------------------- residual

#[derive(Serialize)]
struct SingularLocusReport {
    kind: &'static str,
    points: usize,
    centroid: [f64; 3],
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Serialize)]
struct ResidualSummary {
    surface: String,
    seeds: usize,
    points: usize,
    regular_points: usize,
    singular_points: usize,
    max_abs_residual: f64,
    max_abs_coordinate_residual: f64,
    max_abs_mean_curvature: f64,
    min_nh: f64,
    worst_point: Option<[f64; 3]>,
    minimal: bool,
    singular_loci: Vec<SingularLocusReport>,
}

struct ResidualRow {
    p: Point,
    nh: f64,
    h: f64,
    residual: f64,
    coordinate: f64,
    nt: f64,
    singular: bool,
    near: Option<Point>,
}

/// Grid points with |N_h| below this seed a search for nearby singular points.
const SINGULAR_SEARCH_NH: f64 = 0.25;

fn residual(a: &ResidualArgs) -> Res<ResidualSummary> {
    let r = resolve_surface(&a.surface)?;
    let w = window3(&a.window)?;
    if a.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    positive(a.eps_sing, "eps-sing")?;
    positive(a.minimal_tol, "minimal-tol")?;
    let n = a.grid;
    let h: Vec<f64> = w.iter().map(|r| (r[1] - r[0]) / (n - 1) as f64).collect();
    let reach = h.iter().cloned().fold(0.0, f64::max);
    let tol = Tolerances { eps_sing: a.eps_sing, eps_level: f64::INFINITY };
    let inside = |p: &Point| {
        let c = p.to_array();
        (0..3).all(|k| c[k] >= w[k][0] && c[k] <= w[k][1])
    };
    let rows: Vec<Option<ResidualRow>> = par::map_range(n * n * n, |idx| {
        let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
        let seed = Point::new(w[0][0] + h[0] * i as f64, w[1][0] + h[1] * j as f64, w[2][0] + h[2] * k as f64);
        let p = surface::project_to_surface(&r.field, &seed, 50)?;
        if !inside(&p) || p.coord_distance(&seed) > reach {
            return None;
        }
        let d = surface::level_data(&r.field, &p, &tol).ok()?;
        if d.singular {
            return Some(ResidualRow { p, nh: d.nh_norm, h: f64::NAN, residual: f64::NAN, coordinate: f64::NAN, nt: d.nt, singular: true, near: None });
        }
        let near = if d.nh_norm < SINGULAR_SEARCH_NH {
            surface::refine_singular(&r.field, &p, 60, a.eps_sing).filter(|q| inside(q) && q.coord_distance(&p) <= 2.0 * reach)
        } else {
            None
        };
        let hc = surface::mean_curvature_with(&r.field, &p, &tol).ok()?;
        let m = surface::minimal_residual(&r.field, &p).ok()?;
        Some(ResidualRow {
            p,
            nh: d.nh_norm,
            h: hc,
            residual: m.normalized.unwrap_or(f64::NAN),
            coordinate: m.coordinate,
            nt: d.nt,
            singular: false,
            near,
        })
    });
    let rows: Vec<ResidualRow> = rows.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(CliError::Numerical("the window does not meet the surface".into()));
    }
    if let Some(path) = &a.csv {
        let data: Vec<[f64; 7]> = rows.iter().map(|r| [r.p.x, r.p.y, r.p.z, r.nh, r.h, r.residual, r.nt]).collect();
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        export::write_csv(BufWriter::new(f), ["x", "y", "z", "nh", "H", "residual", "NT"], &data).map_err(|e| io_err(path, e))?;
    }
    let mut max_res = 0.0f64;
    let mut worst = None;
    let mut max_coord = 0.0f64;
    let mut max_h = 0.0f64;
    let mut min_nh = f64::INFINITY;
    for row in rows.iter().filter(|r| !r.singular) {
        if row.residual.abs() > max_res {
            max_res = row.residual.abs();
            worst = Some(row.p.to_array());
        }
        max_coord = max_coord.max(row.coordinate.abs());
        max_h = max_h.max(row.h.abs());
        min_nh = min_nh.min(row.nh);
    }
    let on_grid = rows.iter().filter(|r| r.singular).count();
    let regular = rows.len() - on_grid;
    let singular: Vec<Point> = rows.iter().filter(|r| r.singular).map(|r| r.p).chain(rows.iter().filter_map(|r| r.near)).collect();
    Ok(ResidualSummary {
        surface: r.field.to_string(),
        seeds: n * n * n,
        points: rows.len(),
        regular_points: regular,
        singular_points: on_grid,
        max_abs_residual: max_res,
        max_abs_coordinate_residual: max_coord,
        max_abs_mean_curvature: max_h,
        min_nh: if min_nh.is_finite() { min_nh } else { 0.0 },
        worst_point: worst,
        minimal: max_res < a.minimal_tol,
        singular_loci: cluster(&singular, 2.0 * reach),
    })
}

/// Group points closer than `gap` (single linkage).
fn cluster(pts: &[Point], gap: f64) -> Vec<SingularLocusReport> {
    let n = pts.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(l: &mut [usize], mut i: usize) -> usize {
        while l[i] != i {
            l[i] = l[l[i]];
            i = l[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if pts[i].coord_distance(&pts[j]) <= gap {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Point>)> = Vec::new();
    for i in 0..n {
        let r = root(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(pts[i]),
            None => groups.push((r, vec![pts[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            let mut c = [0.0; 3];
            for p in &g {
                for (k, v) in p.to_array().iter().enumerate() {
                    lo[k] = lo[k].min(*v);
                    hi[k] = hi[k].max(*v);
                    c[k] += v / g.len() as f64;
                }
            }
            let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
            let kind = if extent <= gap { "point" } else { "curve" };
            SingularLocusReport { kind, points: g.len(), centroid: c, min: lo, max: hi }
        })
        .collect()
}

// ------------------------------------------------------------------- curve

#[derive(Serialize)]
struct OracleReport {
    sup_deviation: f64,
    max_horizontality_drift: f64,
    samples: usize,
}

#[derive(Serialize)]
struct CurveSummary {
    family: curve::CurveFamily,
    frame_velocity: [f64; 2],
    is_geodesic: bool,
    torsion_along: f64,
    samples: usize,
    start: [f64; 3],
    end: [f64; 3],
    max_horizontality_defect: f64,
    oracle: Option<OracleReport>,
}

fn curve_cmd(a: &CurveArgs) -> Res<CurveSummary> {
    let p0 = point3(&a.p0, "p0")?;
    let [t0, t1] = range2(&a.t, "t")?;
    if a.n < 1 {
        return Err(usage("--n must be at least 1"));
    }
    let c = match (&a.v, a.alpha) {
        (Some(v), None) => {
            let v = point3(v, "v")?;
            curve::make_curve(p0, CoordVector::new(v.x, v.y, v.z))?
        }
        (None, Some(al)) => curve::from_angle(p0, al)?,
        _ => return Err(usage("give exactly one of --alpha or --v")),
    };
    let samples = c.sample(t0, t1, a.n)?;
    let defect = samples.iter().fold(0.0f64, |m, s| m.max(curve::horizontality_defect(&s.p, &s.v).abs()));
    if let Some(path) = &a.csv {
        let rows: Vec<[f64; 7]> = samples.iter().map(|s| s.to_row()).collect();
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        export::write_csv(BufWriter::new(f), ["t", "x", "y", "z", "dx", "dy", "dz"], &rows).map_err(|e| io_err(path, e))?;
    }
    let oracle = if a.oracle {
        let mut sup = 0.0f64;
        let mut drift = 0.0f64;
        let mut count = 0;
        for end in [t1, t0] {
            if end == 0.0 {
                continue;
            }
            for s in curve::integrate_ode_with(p0, c.v0, end, a.n, &OdeOptions::default())? {
                let (q, _) = c.eval(s.t)?;
                let scale = 1.0 + q.x.abs() + q.y.abs() + q.z.abs();
                sup = sup.max(q.coord_distance(&s.p) / scale);
                drift = drift.max(curve::horizontality_defect(&s.p, &s.v).abs() / scale);
                count += 1;
            }
        }
        Some(OracleReport { sup_deviation: sup, max_horizontality_drift: drift, samples: count })
    } else {
        None
    };
    let fv = c.frame_velocity();
    Ok(CurveSummary {
        family: c.family,
        frame_velocity: [fv.a, fv.b],
        is_geodesic: c.is_geodesic(),
        torsion_along: c.torsion_along(),
        samples: samples.len(),
        start: samples[0].p.to_array(),
        end: samples[samples.len() - 1].p.to_array(),
        max_horizontality_defect: defect,
        oracle,
    })
}

// ------------------------------------------------------------------- sweep

#[derive(Serialize)]
struct SweepSummary {
    gamma: HorizontalCurve,
    gamma_is_characteristic: bool,
    grid: [usize; 2],
    branches: BranchCounts,
    orthogonality_defect: f64,
    max_abs_vt_on_base: f64,
    max_jacobi_fd_deviation: f64,
    max_abs_mean_curvature: f64,
    rulings_geodesic: bool,
    max_abs_ruling_torsion: f64,
    max_abs_gamma_torsion: f64,
    singular_loci: Option<Vec<stationary::SingularLocus>>,
}

#[derive(Serialize, Default)]
struct BranchCounts {
    generic: usize,
    x_branch: usize,
    y_branch: usize,
}

fn sweep(a: &SweepArgs) -> Res<SweepSummary> {
    let p0 = point3(&a.x0, "x0")?;
    let eps = range2(&a.eps, "eps")?;
    let t = range2(&a.t, "t")?;
    let grid = match a.grid[..] {
        [ne, nt] if ne >= 2 && nt >= 2 => [ne, nt],
        _ => return Err(usage("--grid needs two counts of at least 2")),
    };
    let gamma = match a.gamma {
        GammaKind::Characteristic | GammaKind::Exp | GammaKind::Line => match (&a.v0, a.alpha) {
            (Some(v), None) => {
                let v = point3(v, "v0")?;
                HorizontalCurve::characteristic(p0, CoordVector::new(v.x, v.y, v.z))?
            }
            (None, Some(al)) => HorizontalCurve::Characteristic { p0, a: al.cos(), b: al.sin() },
            (None, None) => return Err(usage("characteristic curves need --v0 or --alpha")),
            _ => return Err(usage("give only one of --v0 and --alpha")),
        },
        GammaKind::XLine => HorizontalCurve::XLine { p0 },
        GammaKind::YLine => HorizontalCurve::YLine { p0 },
        GammaKind::Ramp => HorizontalCurve::Ramp { p0, w: a.w, mu0: a.mu0, mu1: a.mu1 },
    };
    let s = if a.skew != 0.0 {
        stationary::skewed_surface(gamma, eps, t, grid, a.skew)?
    } else {
        stationary::sweep_surface(gamma, eps, t, grid)?
    };
    let samples = s.samples();
    if samples.iter().any(|x| !x.point.is_finite()) {
        return Err(CliError::Numerical("surface overflows on the grid".into()));
    }
    if let Some(path) = &a.csv {
        let rows: Vec<[f64; 7]> = samples.iter().map(|x| x.to_row()).collect();
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        export::write_csv(BufWriter::new(f), ["eps", "t", "x", "y", "z", "nh", "VT"], &rows).map_err(|e| io_err(path, e))?;
    }
    if let Some(path) = &a.obj {
        let pts: Vec<Point> = samples.iter().map(|x| x.point).collect();
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        let comment = format!("sol-geo {} sweep of {} ({} x {} grid)", crate::VERSION, gamma.name(), grid[0], grid[1]);
        export::write_obj(BufWriter::new(f), &pts, grid[0], grid[1], &comment).map_err(|e| io_err(path, e))?;
    }
    let mut branches = BranchCounts::default();
    let mut base = 0.0f64;
    let mut ruling_torsion = 0.0f64;
    let mut gamma_torsion = 0.0f64;
    let mut geodesic = true;
    for i in 0..grid[0] {
        let e = s.eps_at(i);
        match s.branch_at(e) {
            Branch::Generic => branches.generic += 1,
            Branch::XBranch => branches.x_branch += 1,
            Branch::YBranch => branches.y_branch += 1,
        }
        base = base.max(s.jacobi_vertical(e, 0.0).abs());
        let (c, _) = s.ruling_curve(e)?;
        ruling_torsion = ruling_torsion.max(c.torsion_along().abs());
        geodesic &= c.is_geodesic();
        gamma_torsion = gamma_torsion.max(gamma.torsion_ratio(e).abs());
    }
    let per_point: Vec<(f64, f64)> = par::map_range(samples.len(), |k| {
        let x = &samples[k];
        let closed = s.jacobi_vertical(x.eps, x.t);
        let fd = s.jacobi_vertical_fd(x.eps, x.t, 1e-6);
        let dev = (closed - fd).abs() / (1.0 + closed.abs());
        let h = if x.t.abs() > 1e-3 { s.mean_curvature(x.eps, x.t).map_or(0.0, f64::abs) } else { 0.0 };
        (dev, h)
    });
    let fd_dev = per_point.iter().fold(0.0f64, |m, v| m.max(v.0));
    let max_h = per_point.iter().fold(0.0f64, |m, v| m.max(v.1));
    Ok(SweepSummary {
        gamma,
        gamma_is_characteristic: gamma.is_characteristic(),
        grid,
        branches,
        orthogonality_defect: stationary::orthogonality_check(&s),
        max_abs_vt_on_base: base,
        max_jacobi_fd_deviation: fd_dev,
        max_abs_mean_curvature: max_h,
        rulings_geodesic: geodesic,
        max_abs_ruling_torsion: ruling_torsion,
        max_abs_gamma_torsion: gamma_torsion,
        singular_loci: a.scan_singular.then(|| stationary::uniqueness_scan(&s)),
    })
}

// --------------------------------------------------------------- stability

#[derive(Serialize)]
struct QEntry {
    index: usize,
    test_function: TestFunction,
    report: stability::QuadratureReport,
}

#[derive(Serialize)]
struct ComparisonSummary {
    kind: SimplifiedKind,
    agree_all: bool,
    mismatched_terms: Vec<String>,
    max_abs_difference: f64,
    comparisons: Vec<stability::QComparison>,
}

#[derive(Serialize)]
struct QformSummary {
    surface: String,
    singular_set: stability::SingularSet,
    tube: f64,
    battery: usize,
    min_total: f64,
    min_margin: f64,
    max_error_estimate: f64,
    all_nonnegative: bool,
    reports: Vec<QEntry>,
    comparison: Option<ComparisonSummary>,
}

fn qform(a: &QformArgs) -> Res<QformSummary> {
    let r = resolve_surface(&a.surface)?;
    positive(a.half_width, "half-width")?;
    if a.cells < 1 {
        return Err(usage("--cells must be at least 1"));
    }
    if let Some(t) = a.tube {
        positive(t, "tube")?;
    }
    let patch: Box<dyn stability::Patch> = match &r.catalog {
        Some(cat) => stability::catalog_patch_oriented(cat, a.half_width, a.surface.flip_orientation)?,
        None => {
            let h = a.half_width;
            Box::new(stability::field_patch(&r.field, a.axis, [[-h, h], [-h, h]])?)
        }
    };
    let dom = patch.domain();
    let tube = a.tube.unwrap_or(stability::DEFAULT_TUBE_FRACTION * (dom[0][1] - dom[0][0]).min(dom[1][1] - dom[1][0]));
    let opts = QOptions { cells: a.cells, tube: Some(tube), integrand: stability::QIntegrand::General };
    let battery = stability::battery(patch.as_ref(), a.battery, a.seed, Some(tube));
    let mut reports = Vec::with_capacity(battery.len());
    for (index, u) in battery.iter().enumerate() {
        let report = stability::q_form(patch.as_ref(), u, &opts)?;
        reports.push(QEntry { index, test_function: *u, report });
    }
    let comparison = if a.compare {
        let kind = match r.catalog {
            Some(CatalogSurface::PlaneAb { .. } | CatalogSurface::PlaneX { .. } | CatalogSurface::PlaneY { .. }) => SimplifiedKind::PlaneAb,
            Some(CatalogSurface::SaddleCurve { .. }) => SimplifiedKind::SaddleCurve,
            _ => return Err(usage("--compare needs plane-x, plane-y, plane-ab or saddle-curve")),
        };
        let mut comparisons = Vec::with_capacity(reports.len());
        for e in &reports {
            let s = stability::q_form_simplified(kind, patch.as_ref(), &e.test_function, &opts)?;
            comparisons.push(stability::compare_q(e.report, s));
        }
        let mut terms: Vec<String> = comparisons.iter().flat_map(|c| c.mismatches.iter().map(|m| m.term.clone())).collect();
        terms.sort();
        terms.dedup();
        let max_diff = comparisons
            .iter()
            .flat_map(|c| c.mismatches.iter().map(|m| m.difference.abs()))
            .fold(0.0f64, f64::max);
        Some(ComparisonSummary {
            kind,
            agree_all: comparisons.iter().all(|c| c.agree),
            mismatched_terms: terms,
            max_abs_difference: max_diff,
            comparisons,
        })
    } else {
        None
    };
    let min_total = reports.iter().map(|e| e.report.total).fold(f64::INFINITY, f64::min);
    let min_margin = reports.iter().map(|e| e.report.total + e.report.error_estimate).fold(f64::INFINITY, f64::min);
    let max_err = reports.iter().map(|e| e.report.error_estimate).fold(0.0, f64::max);
    Ok(QformSummary {
        surface: patch.label(),
        singular_set: patch.singular_set(),
        tube,
        battery: reports.len(),
        min_total: if reports.is_empty() { 0.0 } else { min_total },
        min_margin: if reports.is_empty() { 0.0 } else { min_margin },
        max_error_estimate: max_err,
        all_nonnegative: reports.iter().all(|e| e.report.total >= -e.report.error_estimate),
        reports,
        comparison,
    })
}

fn sufficient(a: &SufficientArgs) -> Res<stability::SufficientReport> {
    let r = resolve_surface(&a.surface)?;
    let w = window3(&a.window)?;
    if a.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    Ok(stability::sufficient_condition(&r.field, w, a.grid)?)
}

#[derive(Serialize)]
struct AreaEntry {
    eta: f64,
    area: f64,
    error: f64,
    difference: f64,
    exceeds_error: bool,
}

#[derive(Serialize)]
struct AreaSummary {
    plane: PlaneKind,
    base_area: f64,
    base_error: f64,
    grid: [usize; 2],
    competitors: Vec<AreaEntry>,
    strictly_increasing: bool,
    all_exceed_base: bool,
}

fn area(a: &AreaArgs) -> Res<AreaSummary> {
    let r = resolve_surface(&a.surface)?;
    let (plane, c) = r
        .catalog
        .as_ref()
        .and_then(PlaneKind::from_catalog)
        .ok_or_else(|| usage("area compares plane-x, plane-y or plane-z"))?;
    if a.window.len() != 4 {
        return Err(usage("--window needs four numbers"));
    }
    let w = [range2(&a.window[0..2], "window")?, range2(&a.window[2..4], "window")?];
    let [c1, c2] = match a.bump_center[..] {
        [x, y] => [x, y],
        _ => return Err(usage("--bump-center needs two numbers")),
    };
    if a.cells < 1 {
        return Err(usage("--cells must be at least 1"));
    }
    let mk = |c| Bump::new(c, a.bump_plateau, a.bump_radius).map_err(|e| usage(e.to_string()));
    let bump = TestFunction { amplitude: 1.0, first: mk(c1)?, second: mk(c2)? };
    let mut competitors = Vec::new();
    let mut base = None;
    let mut grid = [0, 0];
    for &eta in &a.eta {
        if !eta.is_finite() {
            return Err(usage("--eta values must be finite"));
        }
        let rep = stability::area_compare(plane, c, &GraphPerturbation { eta, bump }, w, a.cells)?;
        grid = rep.grid;
        base.get_or_insert(rep.base);
        let err = rep.base.error + rep.competitor.error;
        competitors.push(AreaEntry {
            eta,
            area: rep.competitor.value,
            error: rep.competitor.error,
            difference: rep.difference,
            exceeds_error: rep.difference > err,
        });
    }
    let base = base.ok_or_else(|| usage("--eta needs at least one value"))?;
    let strictly = competitors.windows(2).all(|p| p[1].eta > p[0].eta && p[1].area > p[0].area + p[0].error + p[1].error);
    Ok(AreaSummary {
        plane,
        base_area: base.value,
        base_error: base.error,
        grid,
        all_exceed_base: competitors.iter().all(|e| e.exceeds_error),
        strictly_increasing: strictly,
        competitors,
    })
}

#[derive(Serialize)]
struct JacobiSummary {
    profile: stability::JacobiProfile,
    foliation: Option<Vec<[f64; 2]>>,
    max_foliation_deviation: Option<f64>,
}

fn jacobi(a: &JacobiArgs) -> Res<JacobiSummary> {
    let r = resolve_surface(&a.surface)?;
    let seed = point3(&a.point, "point")?;
    let s = range2(&a.s, "s")?;
    let p = surface::project_to_surface(&r.field, &seed, 50)
        .ok_or_else(|| CliError::Numerical("cannot project the point onto the surface".into()))?;
    let profile = stability::jacobi_profile(&r.field, &p, s, a.n.max(1))?;
    let (fol, dev) = if a.foliation {
        let mut v = Vec::new();
        let mut dev = 0.0f64;
        for smp in &profile.samples {
            let x = stability::jacobi_field_numeric(&r.field, &p, smp.s)?;
            dev = dev.max((x - smp.closed).abs() / (1.0 + x.abs()));
            v.push([smp.s, x]);
        }
        (Some(v), Some(dev))
    } else {
        (None, None)
    };
    Ok(JacobiSummary { profile, foliation: fol, max_foliation_deviation: dev })
}
