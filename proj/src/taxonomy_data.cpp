// Compiled-in bias registry. Stage lists are the union of an entry's scope
// range and its significant stages.

#include <numeric>

#include "taxonomy_data.hpp"

namespace fairlens::detail {

namespace {

using enum BiasCategory;

constexpr FairnessType D = FairnessType::data;
constexpr FairnessType A = FairnessType::application;
constexpr FairnessType M = FairnessType::model_design_development;
constexpr FairnessType Me = FairnessType::metric_based;
constexpr FairnessType S = FairnessType::system_implementation;
constexpr FairnessType E = FairnessType::ecosystem;

std::vector<int> range(int from, int to) {
  std::vector<int> out(static_cast<std::size_t>(to - from + 1));
  std::iota(out.begin(), out.end(), from);
  return out;
}

std::vector<int> all_stages() { return range(1, kStageCount); }

const char* const kSplitAnchor = "Population Bias and Training-Serving Skew";

}  // namespace

std::vector<BiasEntry> build_registry() {
  return {
      // World
      {"historical_bias", "Historical Bias", world,
       "Discrimination already present in society that a project can carry forward or amplify, even when the system "
       "is accurate.",
       all_stages(), {}, {D, A, M, S, E, Me}, "pre-existing societal patterns of discrimination",
       "Structural Racism is treated as a related concept under this entry."},
      {"institutional_bias", "Institutional Bias", world,
       "Rules and routines of organisations that favour some social groups over others without anyone intending it.",
       all_stages(), {}, {A, S, E, Me}, "procedures and practices of particular institutions", ""},

      // Data
      {"representation_bias", "Representation Bias", data,
       "Some subgroups are too thin in the data for the model to serve them well.", range(1, 5), {2, 3, 4, 5},
       {D, M, S}, "a subgroup is underrepresented in the dataset", ""},
      {"data_coding_bias", "Data Coding Bias", data,
       "Coding schemes that erase or misrecord demographic attributes, hiding the needs of the people affected.",
       range(1, 5), {1, 3}, {D, M}, "misrepresentation or erasure of demographic characteristics", ""},
      {"selection_bias", "Selection Bias", data,
       "Whether a record makes it into the dataset depends on factors tied to what is being studied.", range(1, 5),
       {3}, {D, M}, "affect the selection or inclusion of data points", ""},
      {"chronological_bias", "Chronological Bias", data,
       "Records gathered in different periods were collected under different methods or rules.", range(1, 5), {3},
       {D, M}, "added at different times", ""},
      {"missing_data_bias", "Missing Data Bias", data,
       "Gaps in the data follow a pattern that carries information, so dropping or imputing them skews results.",
       range(1, 5), {3, 4, 5}, {D, M}, "non-random but statistically informative events", ""},
      {"wrong_sample_size_bias", "Wrong Sample Size Bias", data,
       "Too few rows for the number of features or subgroups to support reliable conclusions.", range(1, 5), {3},
       {D, M}, "curse of dimensionality", ""},

      // Design
      {"label_choice_bias", "Label or Label Choice Bias", design,
       "The target variable is a proxy that does not mean the same thing for every group.",
       [] {
         auto s = range(1, 6);
         s.push_back(11);
         return s;
       }(),
       {2, 4, 5, 6}, {A, M, S, E}, "same meaning for all data subjects", ""},
      {"measurement_bias", "Measurement Bias", design,
       "Features or labels are measured with instruments or proxies that work unevenly across groups.", range(1, 5),
       {4, 5}, {D, M}, "the choice of how to measure the labels", ""},
      {"cohort_bias", "Cohort Bias", design,
       "Group categories default to the conventional or convenient ones and miss finer or other protected groups.",
       range(3, 5), {3, 4, 5}, {D, M, E}, "traditional or easily measured groups", ""},
      {"annotation_bias", "Annotation Bias", design,
       "Labellers bring their own viewpoint, fatigue or cultural assumptions into the labels they assign.",
       range(3, 5), {3, 5}, {D, M}, "incorporate their subjective perceptions into their annotations", ""},
      {"hardware_bias", "Hardware Bias", design,
       "Devices and sensors built around a majority body type perform worse for everyone else.", range(3, 11),
       {3, 9}, {D, M, S}, "not designed to consider the diverse physiological needs", ""},
      {"model_selection_bias", "Model Selection Bias", design,
       "The chosen model class does not fit the question or context, for example when interpretability is needed.",
       range(2, 6), {2, 6}, {Me, M, E}, "choose a model that does not sufficiently respond", ""},
      {"evaluation_bias", "Evaluation Bias", design,
       "Evaluation metrics or benchmarks hide poor performance for some subgroups.", range(4, 12), {7, 8},
       {Me, M, E}, "performance metrics that are insufficient", ""},
      {"semantic_bias", "Semantic Bias", design,
       "Learned representations absorb discriminatory associations from their source material.", range(2, 7),
       {2, 3, 5, 6, 7}, {D, M, E}, "discriminatory inferences are allowed to arise", ""},
      {"confounding", "Confounding", design,
       "A hidden variable drives both inputs and outcome, producing misleading relationships.", range(4, 8), {4, 5},
       {D, M, E}, "independently influences both the dependent and independent variables", ""},
      {"aggregation_bias", "Aggregation Bias", design,
       "A single model is applied to subgroups whose input-output relationships differ.", range(6, 8), {6, 7},
       {M, Me}, "mapping functions from inputs to outputs", ""},
      {"reporting_bias", "Reporting Bias", design,
       "Results are released without evidence of how the system performs across groups.", range(7, 9), {8},
       {Me, M, S}, "without transparently reported evidence of effectiveness", ""},
      {"population_bias", "Population Bias", design,
       "The training cohort differs in make-up from the population the model is used on.", range(3, 11), {3, 9},
       {D, M, S}, kSplitAnchor, "Shares a heading with Training-Serving Skew."},
      {"training_serving_skew", "Training-Serving Skew", design,
       "The model is deployed on people or periods whose data differ from what it was trained on.", range(9, 12),
       {9, 11}, {M, S}, kSplitAnchor, "Shares a heading with Population Bias."},
      {"cause_effect_bias", "Cause-Effect Bias", design,
       "Users read correlations in model output as causal relationships.", range(9, 11), {11}, {S, M},
       "assume that correlation implies causation", ""},
      {"implementation_bias", "Implementation Bias", design,
       "The system is used or repurposed outside what it was built for, often with higher stakes.", range(9, 11),
       {9, 11}, {S, A}, "repurposed in ways that were not intended", ""},
      {"decision_automation_bias", "Decision-Automation Bias", design,
       "Users over-trust the system. Covers both overreliance (missing its errors) and overcompliance (deferring "
       "against available evidence).",
       range(9, 11), {10, 11}, {S}, "hampered in their critical judgement", ""},
      {"automation_distrust_bias", "Automation Distrust Bias", design,
       "Users dismiss sound system output out of general scepticism of automation.", range(9, 11), {10, 11}, {S},
       "disregard its salient contributions to evidence-based reasoning", ""},

      // Ecosystem
      {"privilege_bias", "Privilege Bias", ecosystem,
       "The benefits of a technology flow mainly to already advantaged groups.", all_stages(), {}, {A, S, E},
       "skew the benefits of public service technologies", ""},
      {"research_bias", "Research Bias", ecosystem,
       "Funding, staffing and publication practices leave equity-relevant research under-done.", all_stages(), {},
       {A, E}, "deficit in social equity standards", ""},
      {"mcnamara_fallacy", "McNamara Fallacy", ecosystem,
       "Treating what can be counted as what matters, and sidelining qualitative context.", all_stages(),
       all_stages(), {D, A, M, S, E}, "quantitative information is more valuable than other information", ""},
      {"biases_of_rhetoric", "Biases of Rhetoric", ecosystem,
       "Results are promoted with persuasive framing rather than evidence.", range(7, 11), {7, 8, 9, 10, 11},
       {A, M, S, E}, "unjustified or illegitimate forms of persuasive language", ""},
      {"informed_mistrust", "Informed Mistrust", ecosystem,
       "People who have been treated unfairly before avoid or resist a system, skewing its use and data.",
       range(9, 11), {9, 10, 11}, {A, M, E}, "believe that a model is biased against them", ""},
      {"de_agentification_bias", "De-Agentification Bias", ecosystem,
       "Marginalised groups are kept out of shaping the technologies that affect them.", all_stages(),
       {1, 2, 9, 11, 12}, {A, M, E}, "participating or providing input in AI innovation ecosystems", ""},

      // Cognition
      {"availability_bias", "Availability Bias", cognition,
       "Judgements lean on whatever examples come to mind most easily.", all_stages(), {1, 4}, {A, M},
       "information that is most readily available", ""},
      {"self_assessment_bias", "Self-Assessment Bias", cognition,
       "Teams rate their own work and abilities more generously than others'.", all_stages(), {1}, {A, M},
       "in more favourable terms than others", ""},
      {"confirmation_bias", "Confirmation Bias", cognition,
       "Evidence is sought and weighed in ways that support what the team already believes.", all_stages(), {},
       {A, M, S}, "confirms preexisting ideas and beliefs", ""},
      {"naive_realism", "Naïve Realism", cognition,
       "Assuming one's own view of the world is the objective one.", all_stages(), {}, {D, M, A},
       "perceive the world in objective terms", ""},
      {"law_of_the_instrument", "Law of the Instrument (Maslow's Hammer)", cognition,
       "Reaching for a familiar tool regardless of whether it suits the problem.", all_stages(), {1, 6}, {A, M},
       "overreliance on a particular tool or method", ""},
      {"optimism_bias", "Optimism Bias", cognition,
       "Underestimating the time, cost and risk of the work ahead.", range(1, 9), {1, 9}, {A, S, M},
       "underestimate the amount of time required", ""},
      {"status_quo_bias", "Status Quo Bias", cognition,
       "Preference for keeping current practice, strongest when one project hands over to the next.", {1, 12},
       {12, 1}, {A, M, E}, "most acutely felt during the transition between projects", ""},
      {"positive_results_bias", "Positive Results Bias", cognition,
       "Favourable findings get reported and published more readily than null or negative ones.", all_stages(),
       {1, 2, 4, 6}, {A, S, E}, "also known as publication bias", ""},
  };
}

}  // namespace fairlens::detail
