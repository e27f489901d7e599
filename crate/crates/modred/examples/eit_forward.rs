//! Complete-electrode-model EIT forward solves on the unit disk: mesh
//! statistics, conservation and reciprocity checks, and convergence of
//! electrode voltages under mesh refinement.

use modred::eit::*;
use modred::Result;

fn main() -> Result<()> {
    let l = 8;
    let frame = CurrentFrame::pairwise(l)?;

    let mut prev: Option<Vec<f64>> = None;
    for refinement in 1..=4 {
        let mesh = unit_disk_mesh(refinement)?;
        let electrodes = place_electrodes(&mesh, l, DEFAULT_COVERAGE, DEFAULT_CONTACT_IMPEDANCE)?;
        let sigma = vec![1.0; mesh.n_elements()];
        let sol = cem_forward(&mesh, &sigma, &electrodes, &frame)?;
        let v = sol.stacked();

        // gauge: electrode voltages sum to zero per pattern
        let mut gauge: f64 = 0.0;
        for p in 0..frame.n_patterns() {
            let s: f64 = (0..l).map(|e| sol.v.get(e, p)).sum();
            gauge = gauge.max(s.abs());
        }
        // reciprocity: IᵀV is symmetric (drive pattern i measured against
        // pattern j equals the reverse)
        let r = frame.patterns().transpose().matmul(&sol.v);
        let mut recip: f64 = 0.0;
        for i in 0..r.rows() {
            for j in 0..r.cols() {
                recip = recip.max((r.get(i, j) - r.get(j, i)).abs());
            }
        }

        let diff = prev
            .as_ref()
            .map(|pv| {
                let d: f64 = v.iter().zip(pv).map(|(a, b)| (a - b) * (a - b)).sum();
                d.sqrt()
            })
            .unwrap_or(f64::NAN);
        println!(
            "refinement {refinement}: {:>5} nodes {:>5} elements | gauge {gauge:.2e} reciprocity {recip:.2e} | change vs previous {diff:.3e}",
            mesh.n_nodes(),
            mesh.n_elements(),
        );
        prev = Some(v);
    }
    println!("voltage changes should shrink by roughly 2x per refinement level");
    Ok(())
}
