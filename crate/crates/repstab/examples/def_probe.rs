// dev probe: bulk DEF + boundary structure at two rate tables
use repstab::codes::{build, CodeSpec, Family};
use repstab::detection::{def_report, extract};
use repstab::noise::NoiseModel;
use repstab::sampler::Sampler;

fn main() {
    for (name, noise) in [
        ("tableS1-low", NoiseModel::reference_low()),
        ("phaseflip-cal", NoiseModel::phaseflip_calibrated()),
    ] {
        let spec = CodeSpec::repetition(Family::RepPhase, 11, 30);
        let code = build(&spec).unwrap();
        let sampler = Sampler::new(&code, noise, 4000, 7).unwrap();
        let tensors: Vec<_> = (0..4000)
            .map(|i| extract(&code, &sampler.shot(i), sampler.refs().batch_for(i)).unwrap())
            .collect();
        let rep = def_report(&code, &tensors);
        println!("== {name}: mean {:.4} bulk {:.4}", rep.mean, rep.bulk_mean);
        println!("   per-round[0..4]  {:?}", &rep.per_round[..4].iter().map(|v| (v*1000.0).round()/1000.0).collect::<Vec<_>>());
        println!("   per-round[last]  {:.4} (t=N_r)", rep.per_round[30]);
        println!("   per-measure      {:?}", rep.per_measure.iter().map(|v| (v*1000.0).round()/1000.0).collect::<Vec<_>>());
    }
    // bit flip at calibrated rates
    let spec = CodeSpec::repetition(Family::RepBit, 11, 30);
    let code = build(&spec).unwrap();
    let sampler = Sampler::new(&code, NoiseModel::bitflip_calibrated(), 4000, 7).unwrap();
    let tensors: Vec<_> = (0..4000)
        .map(|i| extract(&code, &sampler.shot(i), sampler.refs().batch_for(i)).unwrap())
        .collect();
    let rep = def_report(&code, &tensors);
    println!("== bitflip-cal: mean {:.4} bulk {:.4} first {:.4} last {:.4}", rep.mean, rep.bulk_mean, rep.per_round[0], rep.per_round[30]);
}
