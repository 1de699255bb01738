// Render one document in every output format, apply projections, and
// round-trip PROV-JSON.
//
// ```bash
// cargo run --example serialize_formats
// ```

use provkit::model::{
    Activity, ActivityDescription, Agent, AgentKind, Entity, Namespaces, Parameter, ProvenanceDocument,
    QualifiedId, Used, ValueType, WasAssociatedWith, WasGeneratedBy,
};
use provkit::serialize::{
    apply_projection, from_prov_json, to_prov_json, DescriptionLevel, ModelFlavor, ProjectionOptions,
    SerializationFormat,
};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

pub fn run_example() -> Result<()> {
    let id = |s: &str| QualifiedId::from_rendered(s);
    let mut doc = ProvenanceDocument::default();
    let mut desc = ActivityDescription::new(id("ex:stacker")?, "stacker");
    desc.version = Some("2.1".into());
    doc.add_description(desc)?;
    let mut stack = Activity::named(id("ex:stack")?, "stack frames");
    stack.description_ref = Some(id("ex:stacker")?);
    doc.add_activity(stack)?;
    doc.add_entity(Entity::named(id("ex:frames")?, "frames"))?;
    doc.add_entity(Entity::named(id("ex:mosaic")?, "mosaic"))?;
    doc.add_agent(Agent::new(id("ex:obs")?, "Observatory", AgentKind::Organization))?;
    doc.add_parameter(Parameter::new(id("ex:stack")?, "sigma", "3.0", ValueType::Real))?;
    doc.add_used(Used::new(id("ex:stack")?, id("ex:frames")?))?;
    doc.add_generation(WasGeneratedBy::new(id("ex:mosaic")?, id("ex:stack")?))?;
    doc.add_association(WasAssociatedWith::new(id("ex:stack")?, id("ex:obs")?))?;

    for format in SerializationFormat::ALL {
        let text = format.render(&doc)?;
        println!("== {format} ({}), {} bytes", format.mime_type(), text.len());
        if format == SerializationFormat::ProvN {
            print!("{text}");
        }
    }

    let json = to_prov_json(&doc);
    let back = from_prov_json(&json, &Namespaces::default())?;
    assert_eq!(back, doc);

    let w3c = apply_projection(
        &doc,
        &ProjectionOptions {
            model: ModelFlavor::W3c,
            agents: false,
            descriptions: DescriptionLevel::Full,
            ..ProjectionOptions::default()
        },
    );
    assert!(w3c.agents.is_empty() && w3c.parameters.is_empty() && w3c.descriptions.is_empty());
    println!("== W3C projection, no agents");
    print!("{}", SerializationFormat::ProvN.render(&w3c)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
