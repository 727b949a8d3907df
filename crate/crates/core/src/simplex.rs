//! Nelder–Mead downhill simplex.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Offset of each initial vertex from the start point along one coordinate.
    pub initial_step: f64,
    /// Stop once every vertex lies within this distance of the best one.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: std::f64::consts::PI / 8.0,
            tolerance: 1e-4,
            max_evaluations: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// False when the evaluation budget ran out first.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn diameter(vertices: &[Vec<f64>]) -> f64 {
    let best = &vertices[0];
    vertices[1..]
        .iter()
        .map(|v| v.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Minimizes `f` from `x0`. Errors from `f` abort the search.
pub fn nelder_mead<F, E>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Result<SimplexResult, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| -> Result<f64, E> {
        *count += 1;
        f(x)
    };

    let mut vertices: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        vertices.push(v);
    }
    let mut values = Vec::with_capacity(n + 1);
    for v in &vertices {
        values.push(eval(v, &mut evaluations)?);
    }

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        vertices = order.iter().map(|&i| vertices[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let converged = diameter(&vertices) < opts.tolerance;
        if converged || evaluations >= opts.max_evaluations || n == 0 {
            return Ok(SimplexResult {
                point: vertices.swap_remove(0),
                value: values[0],
                evaluations,
                converged: converged || n == 0,
            });
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| vertices[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&vertices[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let fr = eval(&reflected, &mut evaluations)?;
        if fr < values[0] {
            let expanded = along(EXPAND);
            let fe = eval(&expanded, &mut evaluations)?;
            if fe < fr {
                vertices[n] = expanded;
                values[n] = fe;
            } else {
                vertices[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            vertices[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (candidate, fc) = if fr < values[n] {
            let outside = along(CONTRACT);
            let fo = eval(&outside, &mut evaluations)?;
            (outside, fo)
        } else {
            let inside = along(-CONTRACT);
            let fi = eval(&inside, &mut evaluations)?;
            (inside, fi)
        };
        if fc < values[n].min(fr) {
            vertices[n] = candidate;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = vertices[0]
                .iter()
                .zip(&vertices[i])
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            values[i] = eval(&shrunk, &mut evaluations)?;
            vertices[i] = shrunk;
        }
    }
}
