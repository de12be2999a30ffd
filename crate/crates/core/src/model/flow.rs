//! DC fundamental-flow matrices.
//!
//! The fundamental flows `f` are the voltage angles of the `nb - 1`
//! non-reference buses. With `L` the susceptance-weighted Laplacian,
//!
//! * `K = diag(b) * M` where `M` is the line-bus incidence matrix restricted
//!   to non-reference columns, so `K f` is the vector of line flows measured
//!   from `from_bus` to `to_bus`;
//! * `A = -L[:, non_ref]`, so the nodal balance reads `G x + A f = l`.
//!
//! Every column of `A` sums to zero and `A` has full column rank on a
//! connected network.

use super::UcInstance;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FlowModel {
    num_buses: usize,
    num_lines: usize,
    reference: usize,
    /// Bus of each fundamental-flow coordinate.
    coords: Vec<usize>,
    /// Row-major `num_lines x (num_buses - 1)`.
    k: Vec<f64>,
    /// Row-major `num_buses x (num_buses - 1)`.
    a: Vec<f64>,
    /// LU factors of `A` with the reference row removed.
    lu: DenseLu,
}

impl FlowModel {
    pub fn build(instance: &UcInstance) -> Result<Self> {
        let nb = instance.num_buses();
        let m = instance.num_lines();
        let reference = instance.reference_bus();
        let coords: Vec<usize> = (0..nb).filter(|&b| b != reference).collect();
        let nf = coords.len();
        let mut col_of = vec![usize::MAX; nb];
        for (c, &b) in coords.iter().enumerate() {
            col_of[b] = c;
        }

        let mut k = vec![0.0; m * nf];
        let mut a = vec![0.0; nb * nf];
        for (j, line) in instance.lines().iter().enumerate() {
            let b = line.susceptance;
            let (p, q) = (line.from_bus, line.to_bus);
            if p != reference {
                k[j * nf + col_of[p]] += b;
            }
            if q != reference {
                k[j * nf + col_of[q]] -= b;
            }
            // A = -L restricted to non-reference columns.
            for (row, sign_row) in [(p, 1.0), (q, -1.0)] {
                for (col_bus, sign_col) in [(p, 1.0), (q, -1.0)] {
                    if col_bus != reference {
                        a[row * nf + col_of[col_bus]] -= b * sign_row * sign_col;
                    }
                }
            }
        }

        // Reduced square system: drop the reference row of A.
        let mut reduced = Vec::with_capacity(nf * nf);
        for &bus in &coords {
            reduced.extend_from_slice(&a[bus * nf..(bus + 1) * nf]);
        }
        let lu = DenseLu::factor(reduced, nf)?;

        Ok(FlowModel {
            num_buses: nb,
            num_lines: m,
            reference,
            coords,
            k,
            a,
            lu,
        })
    }

    pub fn num_coords(&self) -> usize {
        self.coords.len()
    }

    pub fn num_lines(&self) -> usize {
        self.num_lines
    }

    pub fn num_buses(&self) -> usize {
        self.num_buses
    }

    pub fn reference_bus(&self) -> usize {
        self.reference
    }

    /// Bus whose angle is fundamental-flow coordinate `c`.
    pub fn coord_bus(&self, c: usize) -> usize {
        self.coords[c]
    }

    /// Row `j` of `K`.
    pub fn k_row(&self, line: usize) -> &[f64] {
        let nf = self.coords.len();
        &self.k[line * nf..(line + 1) * nf]
    }

    /// Row `bus` of `A`.
    pub fn a_row(&self, bus: usize) -> &[f64] {
        let nf = self.coords.len();
        &self.a[bus * nf..(bus + 1) * nf]
    }

    /// Column `c` of `A`.
    pub fn a_col(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        let nf = self.coords.len();
        (0..self.num_buses).map(move |b| self.a[b * nf + c])
    }

    /// Line flows `K f`.
    pub fn line_flows(&self, f: &[f64]) -> Vec<f64> {
        (0..self.num_lines)
            .map(|j| dot(self.k_row(j), f))
            .collect()
    }

    /// Nodal terms `A f`.
    pub fn nodal(&self, f: &[f64]) -> Vec<f64> {
        (0..self.num_buses)
            .map(|b| dot(self.a_row(b), f))
            .collect()
    }

    /// Solves `A f = rhs`. The right-hand side must sum to zero.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.num_buses {
            return Err(Error::Dimension(format!(
                "expected {} nodal values, got {}",
                self.num_buses,
                rhs.len()
            )));
        }
        let total: f64 = rhs.iter().sum();
        let scale = rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if total.abs() > 1e-9 * scale {
            return Err(Error::Dimension(format!(
                "nodal vector must be balanced, sums to {total}"
            )));
        }
        let reduced: Vec<f64> = self.coords.iter().map(|&b| rhs[b]).collect();
        Ok(self.lu.solve(&reduced))
    }

    /// Line flows produced by a balanced net injection `p` (generation minus
    /// load), i.e. the flows for the `f` with `p + A f = 0`.
    pub fn flows_for_injection(&self, injection: &[f64]) -> Result<Vec<f64>> {
        let neg: Vec<f64> = injection.iter().map(|v| -v).collect();
        let f = self.solve(&neg)?;
        Ok(self.line_flows(&f))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting.
#[derive(Debug, Clone)]
struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag <= 1e-12 * scale.max(1e-300) {
                return Err(Error::SingularNetwork { pivot: mag });
            }
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                perm.swap(piv, col);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / d;
                if factor != 0.0 {
                    a[r * n + col] = factor;
                    for c in col + 1..n {
                        a[r * n + c] -= factor * a[col * n + c];
                    }
                } else {
                    a[r * n + col] = 0.0;
                }
            }
        }
        Ok(DenseLu { n, lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bus, Generator, Line};
    use approx::assert_abs_diff_eq;

    fn network(nb: usize, edges: &[(usize, usize, f64)]) -> UcInstance {
        let buses = (0..nb)
            .map(|id| Bus {
                id,
                is_reference: id == 0,
            })
            .collect();
        let lines = edges
            .iter()
            .enumerate()
            .map(|(id, &(from_bus, to_bus, susceptance))| Line {
                id,
                from_bus,
                to_bus,
                susceptance,
                flow_limit: 100.0,
            })
            .collect();
        let generators = vec![Generator {
            id: 0,
            bus: 0,
            cost: 1.0,
            p_min: 0.0,
            p_max: 100.0,
            ramp_up: 100.0,
            ramp_down: 100.0,
            ramp_startup: 100.0,
            ramp_shutdown: 100.0,
            initial_on: false,
            initial_output: 0.0,
        }];
        UcInstance::new(buses, lines, generators, 1).unwrap()
    }

    #[test]
    fn single_line() {
        let fm = FlowModel::build(&network(2, &[(0, 1, 1.0)])).unwrap();
        assert_eq!(fm.k_row(0).len(), 1);
        assert_eq!(fm.k_row(0)[0].abs(), 1.0);
        let col_sum: f64 = fm.a_col(0).sum();
        assert_eq!(col_sum, 0.0);
        let flows = fm.flows_for_injection(&[40.0, -40.0]).unwrap();
        assert_abs_diff_eq!(flows[0], 40.0, epsilon = 1e-12);
    }

    #[test]
    fn equal_triangle_splits_two_to_one() {
        // lines: 0-1, 1-2, 0-2
        let fm = FlowModel::build(&network(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])).unwrap();
        let flows = fm.flows_for_injection(&[30.0, 0.0, -30.0]).unwrap();
        assert_abs_diff_eq!(flows[2], 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flows[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flows[1], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn radial_chain_flows_are_forced() {
        let fm = FlowModel::build(&network(3, &[(0, 1, 2.0), (1, 2, 5.0)])).unwrap();
        let flows = fm.flows_for_injection(&[10.0, 0.0, -10.0]).unwrap();
        assert_abs_diff_eq!(flows[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flows[1], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn unbalanced_rhs_rejected() {
        let fm = FlowModel::build(&network(2, &[(0, 1, 1.0)])).unwrap();
        assert!(matches!(fm.solve(&[1.0, 0.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn tiny_susceptance_is_singular() {
        let inst = network(3, &[(0, 1, 1.0), (1, 2, 1e-15)]);
        assert!(matches!(
            FlowModel::build(&inst),
            Err(Error::SingularNetwork { .. })
        ));
    }
}
