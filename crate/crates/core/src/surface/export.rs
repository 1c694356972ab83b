//! Wavefront OBJ meshes and per-node CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::surface::Bundle2;

/// Writes the `N_β × N_λ` lattice of node positions as a quad mesh, closed at
/// the pole by a triangle fan around the mean of the first ring.
pub fn write_obj(path: &Path, bundle: &Bundle2, n_lambda: usize) -> Result<()> {
    let mut s = String::new();
    let rows = bundle.nodes.len() / n_lambda;
    for p in &bundle.nodes {
        let _ = writeln!(s, "v {:.12} {:.12} {:.12}", p.x[0], p.x[1], p.x[2]);
    }
    let mut pole = [0.0; 3];
    for p in &bundle.nodes[..n_lambda] {
        for a in 0..3 {
            pole[a] += p.x[a] / n_lambda as f64;
        }
    }
    let _ = writeln!(s, "v {:.12} {:.12} {:.12}", pole[0], pole[1], pole[2]);
    let id = |i: usize, j: usize| i * n_lambda + (j % n_lambda) + 1;
    let apex = rows * n_lambda + 1;
    for j in 0..n_lambda {
        let _ = writeln!(s, "f {} {} {}", apex, id(0, j), id(0, j + 1));
    }
    for i in 0..rows.saturating_sub(1) {
        for j in 0..n_lambda {
            let _ = writeln!(s, "f {} {} {} {}", id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// One row per node: position and the main scalar fields.
pub fn fields_csv(bundle: &Bundle2) -> String {
    let mut s = String::from("x,y,z,rho,F_nu,u_hat,u_bar,H_F,kappa1,kappa2,speed\n");
    for p in &bundle.nodes {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.x[0], p.x[1], p.x[2], p.rho, p.f_nu, p.u_hat, p.u_bar, p.h_f, p.kappa[0], p.kappa[1], p.speed
        );
    }
    s
}
