use floquet_core::kicked_top::{floquet_operator, FloquetVariant, ModelParams};
use floquet_core::magnus::magnus_term;
use floquet_core::spin::{expm_hermitian, max_abs_diff, SpinSize, c64, CMat};

fn main() {
    let s = SpinSize::new(12).unwrap();
    let params = ModelParams::paper_default();
    let c: Vec<CMat> = (0..3).map(|k| magnus_term(&params, s, k).unwrap()).collect();

    for signs in [[1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, -1.0, -1.0], [1.0, 1.0, -1.0]] {
        println!("signs {:?}", signs);
        for order in 0..=2usize {
            let err_at = |tau: f64| {
                let step = floquet_operator(&params, s, tau, FloquetVariant::ThreeStep).unwrap();
                let mut hf = CMat::zeros((s.dim(), s.dim()));
                for k in 0..=order {
                    hf = hf + c[k].mapv(|z| z * c64::new(signs[k] * tau.powi(k as i32), 0.0));
                }
                let approx = expm_hermitian(&hf, tau).unwrap();
                max_abs_diff(&step.u, &approx)
            };
            let (e1, e2) = (err_at(0.08), err_at(0.04));
            println!("  order {order}: slope {:.3}  (e(0.08) = {:.3e})", (e1 / e2).log2(), e1);
        }
    }
}
