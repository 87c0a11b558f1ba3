use tnare::bench::gen_example2;
use tnare::iterative::da_solve;
use tnare::default_eps;

fn main() {
    for seed in 1u64..=40 {
        let p = gen_example2(18, seed);
        match da_solve(&p, default_eps(324), 64) {
            Ok(rep) => println!("seed={seed}: DA ok, res {:.3e}, k={}", rep.residual, rep.iterations),
            Err(e) => println!("seed={seed}: DA {e}"),
        }
    }
}
