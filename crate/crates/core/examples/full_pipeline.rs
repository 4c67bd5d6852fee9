// Synthetic pair in, complete workspace out.

use nounclass::pipeline::{files, run_pipeline, PipelineConfig, PipelineInputs, Workspace};
use nounclass::synth::{files as synth, generate_pair, SynthSpec};

fn main() -> nounclass::Result<()> {
    let root = std::env::temp_dir().join("nounclass-example-pipeline");
    let data = root.join("data");
    generate_pair(&SynthSpec::preset("innovation")?)?.write_to_dir(&data)?;

    let inputs = PipelineInputs {
        source: data.join(synth::SOURCE),
        source_paradigms: Some(data.join(synth::SOURCE_PARADIGMS)),
        target: data.join(synth::TARGET),
        corpus: Some(data.join(synth::CORPUS)),
        inventory: Some(data.join(synth::INVENTORY)),
    };
    let mut config = PipelineConfig::default();
    config.report.gold = Some(data.join(synth::TARGET_GOLD));

    let ws = Workspace::new(root.join("run"))?;
    let report = run_pipeline(&inputs, &config, &ws)?;
    println!("accepted {} of {} scored words", report.discovery.accepted, report.discovery.words_scored);
    if let Some(acc) = &report.accuracy {
        println!("accuracy against gold {:.1}%", acc.accuracy);
    }
    for i in &report.discovery.innovations {
        println!("innovation {}- size {} consistency {:.1}%", i.prefix, i.size, i.consistency);
    }
    println!("report at {}", ws.path(files::REPORT).display());
    Ok(())
}
