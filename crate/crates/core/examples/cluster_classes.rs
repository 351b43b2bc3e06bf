//! Max-min closure over class-topic weights and a sweep of λ-cuts.

use featloc::analysis::{export_heatmap, ClassTopicMatrix, FuzzyClassClustering, ShadeNormalization};

fn main() -> featloc::Result<()> {
    let classes = ["AddTool", "PolyLineFigure", "PolygonTool", "DragTracker", "FigureChange"];
    let ctm = ClassTopicMatrix::from_rows(
        classes.iter().map(|c| c.to_string()).collect(),
        vec![
            vec![0.352631, 0.243412, 0.237861, 0.012321],
            vec![0.123021, 0.534300, 0.030045, 0.320000],
            vec![0.000521, 0.670120, 0.064521, 0.414211],
            vec![0.135462, 0.111213, 0.567262, 0.520000],
            vec![0.621001, 0.106423, 0.323232, 0.000000],
        ],
    )?;
    let clustering = FuzzyClassClustering::new(&ctm)?;
    println!("closure reached after {} squarings", clustering.squarings);
    print!("{}", clustering.closure_text());

    for lambda in [0.0, 0.8, 0.9, 0.95, 1.0] {
        let p = clustering.cut(lambda)?;
        println!("λ={lambda:<5} {:?}", p.clusters);
    }

    let heat = export_heatmap(&ctm, ShadeNormalization::PerRow)?;
    for cell in heat.cells.iter().filter(|c| c.shade == 1.0) {
        println!("{} is darkest in topic {}", cell.class, cell.topic);
    }
    Ok(())
}
