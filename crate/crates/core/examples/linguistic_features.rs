//! Feature extraction from a dependency-parsed document in CoNLL-U.
//!
//! cargo run --example linguistic_features -- [file.conllu]

use clts_eval::features::{
    entity_features, extract_features, parse_conllu, parse_conllu_str, tree_depth, FeatureConfig, FeatureResources,
    FeatureVector, FrequencyList, Hyphenator, LanguageResources,
};
use clts_eval::Lang;

const SAMPLE: &str = "# newdoc id = sample
# lang = en
# text = Marie, who lives in Paris, had visited the museum.
1	Marie	Marie	PROPN	_	Number=Sing	9	nsubj	_	NER=B-PER|SpaceAfter=No
2	,	,	PUNCT	_	_	4	punct	_	_
3	who	who	PRON	_	PronType=Rel	4	nsubj	_	_
4	lives	live	VERB	_	Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin	1	acl:relcl	_	_
5	in	in	ADP	_	_	6	case	_	_
6	Paris	Paris	PROPN	_	Number=Sing	4	obl	_	NER=B-LOC|SpaceAfter=No
7	,	,	PUNCT	_	_	4	punct	_	_
8	had	have	AUX	_	Mood=Ind|Tense=Past|VerbForm=Fin	9	aux	_	_
9	visited	visit	VERB	_	Tense=Past|VerbForm=Part	0	root	_	_
10	the	the	DET	_	Definite=Def|PronType=Art	11	det	_	_
11	museum	museum	NOUN	_	Number=Sing	9	obj	_	SpaceAfter=No
12	.	.	PUNCT	_	_	9	punct	_	_

# text = She did not stay.
1	She	she	PRON	_	Person=3|PronType=Prs	4	nsubj	_	NER=B-PER
2	did	do	AUX	_	Tense=Past|VerbForm=Fin	4	aux	_	_
3	not	not	PART	_	Polarity=Neg	4	advmod	_	_
4	stay	stay	VERB	_	VerbForm=Inf	0	root	_	SpaceAfter=No
5	.	.	PUNCT	_	_	4	punct	_	_

";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = match std::env::args().nth(1) {
        Some(path) => parse_conllu(std::fs::File::open(path)?, Lang::En)?,
        None => parse_conllu_str(SAMPLE, Lang::En)?,
    };
    let frequency = FrequencyList::parse("the\t1\nin\t2\nwho\t3\nshe\t4\nnot\t5\nlive\t6\nstay\t7\n")?;
    let resources = FeatureResources::new()
        .with(
            Lang::En,
            LanguageResources {
                hyphenator: Hyphenator::builtin(Lang::En),
                frequency: frequency.clone(),
            },
        )
        .with(
            Lang::Fr,
            LanguageResources {
                hyphenator: Hyphenator::builtin(Lang::Fr),
                frequency,
            },
        );

    for doc in &docs {
        let depths: Vec<usize> = doc.sentences.iter().map(tree_depth).collect();
        let entities = entity_features(doc);
        println!("{} ({}, {} sentences, tree depths {depths:?})", doc.doc_id, doc.lang, doc.sentences.len());
        println!("  unique entities {}, entity/token {:.3}", entities.unique_entities, entities.entity_to_token_ratio);
        let f = extract_features(doc, &resources, &FeatureConfig::default())?;
        for name in FeatureVector::NAMES {
            println!("  {name:<30} {:>9.3}", f.get(name).unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
