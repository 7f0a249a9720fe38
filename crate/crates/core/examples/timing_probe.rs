use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let d = Arc::new(kpp_core::build_strip(40.0, 1.0, 1.0 / 32.0, 0.0).unwrap());
    let op = kpp_core::assemble(&d).unwrap();
    println!("assemble {} unknowns: {:?}", op.n(), t0.elapsed());
    let t1 = Instant::now();
    let pair = kpp_core::principal_eigenpair(&op).unwrap();
    let exact = std::f64::consts::PI.powi(2) * (1.0 + 1.0 / 1600.0);
    println!(
        "strip eigen: lambda {} (expect ~{exact}), rel err {:.2e}, iters {}, res {:.2e}, time {:?}",
        pair.lambda,
        (pair.lambda - exact).abs() / exact,
        pair.iterations,
        pair.residual,
        t1.elapsed()
    );

    let t2 = Instant::now();
    let disk = Arc::new(kpp_core::build_disk(1.0, 1.0 / 64.0, 0.0).unwrap());
    let opd = kpp_core::assemble(&disk).unwrap();
    let pd = kpp_core::principal_eigenpair(&opd).unwrap();
    println!(
        "disk eigen: n {}, lambda {} (expect ~5.7832), iters {}, time {:?}",
        opd.n(),
        pd.lambda,
        pd.iterations,
        t2.elapsed()
    );

    let t3 = Instant::now();
    let wide = Arc::new(kpp_core::build_strip(40.0, 4.0, 1.0 / 32.0, 0.0).unwrap());
    let ones = kpp_core::Field::constant(&wide, 1.0);
    let run =
        kpp_core::flow_to_steady(&wide, &kpp_core::reaction::logistic(), &ones, 0.1, 200_000)
            .unwrap();
    println!(
        "wide strip flow: n {}, class {:?}, steps {}, time {:?}",
        wide.interior_count(),
        run.classification,
        run.steps,
        t3.elapsed()
    );
}
