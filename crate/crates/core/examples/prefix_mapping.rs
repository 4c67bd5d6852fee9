// Cluster profiling, inventory mapping and innovation detection.

use nounclass::prefix::{
    cluster_outcome, detect_innovations, map_cluster, profile_cluster, InnovationCriteria, PrefixInventory,
};

fn main() -> nounclass::Result<()> {
    let inventory = PrefixInventory::bantu_default();
    let criteria = InnovationCriteria::default();

    let ma = ["maembe", "matunda", "magari", "kitabu"];
    let mu = ["mutu", "muzi", "mulango"];
    let qo: Vec<String> = (0..30).map(|i| format!("qo{}", ["ba", "di", "ke", "lu", "mo"][i % 5]) + &"ra".repeat(i / 5 + 1)).collect();

    let mut profiles = Vec::new();
    for (id, members) in [ma.iter().map(|s| s.to_string()).collect(), mu.iter().map(|s| s.to_string()).collect(), qo.clone()]
        .iter()
        .enumerate()
    {
        let p = map_cluster(&profile_cluster(id, members)?, &inventory);
        println!(
            "cluster {id}: dominant {:<4} consistency {:>5.1}% class {:?} ambiguous {} -> {:?}",
            p.dominant_prefix,
            p.consistency,
            p.mapped_class,
            p.ambiguous,
            cluster_outcome(&p, &criteria)
        );
        profiles.push(p);
    }

    let members = vec![
        ma.iter().map(|s| s.to_string()).collect(),
        mu.iter().map(|s| s.to_string()).collect(),
        qo,
    ];
    for r in detect_innovations(&profiles, &members, &criteria, None) {
        println!("innovation {}- in cluster {} ({} words): {}", r.prefix, r.cluster_id, r.size, r.exemplars.join(", "));
    }
    Ok(())
}
