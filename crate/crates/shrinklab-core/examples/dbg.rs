use shrinklab_core::*;
fn main() {
    for n in [32usize, 64, 128] {
        let t = generate::perturbed_product_torus(
            &[(1.3, vec![(2, 0.05, 0.3)]), (1.1, vec![(3, 0.05, 1.1)])], n, n).unwrap();
        let g = induced_geometry(&t).unwrap();
        let r = gauss_consistency(&t, &g);
        // where is the worst?
        println!("n={n} gauss residual {r:.3e}");
    }
    // direct vs gauss parts on clifford
    let t = generate::product_torus(&[1.2, 1.9], 48, 48).unwrap();
    let g = induced_geometry(&t).unwrap();
    println!("clifford-ish gauss {:.3e}", gauss_consistency(&t, &g));
    println!("gauss_k[0] {:.3e} (expect 0)", g.gauss_k[0]);
}
