#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "nn.hpp"

namespace zinn {

enum class ModelKind { Conditional, Classifier };
std::string to_string(ModelKind k);

struct Candidate {
    std::string variable_set;
    NetworkSpec spec;  // input width filled from the variable set

    // "<set>|relu[6,4]|dropout=0.1|l2=0"
    std::string describe() const;
};

enum class ArchitectureFamily { Descending, Wide, Deep };
std::string to_string(ArchitectureFamily f);
ArchitectureFamily family_from_string(const std::string& s);

struct SweepOptions {
    ModelKind kind = ModelKind::Conditional;
    std::vector<std::string> variable_sets{"combined"};
    ArchitectureFamily family = ArchitectureFamily::Descending;
    std::vector<std::size_t> widths{100};   // wide family
    std::vector<std::size_t> depths{2, 3};  // deep family
    std::vector<double> dropouts{0.0};
    std::vector<double> l2s{0.0};
    Activation activation = Activation::ReLU;
};

std::vector<Candidate> make_candidates(const FeatureTable& table, const SweepOptions& options);

// Inclusive "a:b:step" grid, e.g. 0.1:0.9:0.1 -> 0.1, 0.2, ..., 0.9 (values
// are a + i * step, rounded to 12 decimals).
std::vector<double> parse_grid(const std::string& text);

struct CandidateResult {
    Candidate candidate;
    bool failed = false;
    std::string error;
    MetricReport cv;
    std::size_t parameters = 0;
};

struct ProtocolOptions {
    TrainConfig train;  // loss is set from the model kind
    std::uint64_t seed = 1;
};

struct Residual {
    std::string row_id;
    double lat;
    double lon;
    double value;
};

struct ProtocolResult {
    ModelKind kind = ModelKind::Conditional;
    std::vector<CandidateResult> candidates;
    std::size_t best = 0;
    std::vector<std::size_t> columns;  // table columns of the winning variable set
    NetworkParams retrained;           // Train + CV fit, scored on Test
    MetricReport test;
    NetworkParams final_params;  // refit on every usable row
    std::vector<Residual> residuals;
    std::vector<std::string> log;

    const Candidate& winner() const { return candidates[best].candidate; }
};

// Rows a model kind trains on: conditional models only see damage > 0.
std::vector<std::size_t> usable_rows(const FeatureTable& table, const SplitAssignment& split, Partition p,
                                     ModelKind kind);
std::vector<double> targets(const FeatureTable& table, std::span<const std::size_t> rows, ModelKind kind);

// Step 1: train each candidate on Train, score on CV. Failures are recorded.
std::vector<CandidateResult> evaluate_candidates(const FeatureTable& table, const SplitAssignment& split,
                                                 ModelKind kind, std::span<const Candidate> candidates,
                                                 const ProtocolOptions& options);
// Step 2: minimum CV MSE or maximum CV AUROC; ties by parameter count, then
// description. Throws InvalidArgument when every candidate failed.
std::size_t select_best(ModelKind kind, std::span<const CandidateResult> results);

// Steps 1-5: select, retrain on Train + CV, test once, refit on everything.
ProtocolResult run_protocol(const FeatureTable& table, const SplitAssignment& split, ModelKind kind,
                            std::span<const Candidate> candidates, const ProtocolOptions& options);

// Conditional: |yhat - y| over positive test rows; classifier: (p - label)^2.
std::vector<Residual> residuals(const FeatureTable& table, std::span<const std::size_t> rows,
                                std::span<const std::size_t> columns, const NetworkSpec& spec,
                                const NetworkParams& params, ModelKind kind);

void write_residuals(const std::filesystem::path& path, std::span<const Residual> residuals);
void write_sweep_results(const std::filesystem::path& path, ModelKind kind, std::span<const CandidateResult> results);

// ---------------------------------------------------------------------------

struct ZiTrainOptions {
    std::string variable_set = "combined";
    std::vector<Candidate> conditional;  // empty: wide-100, dropout 0.2
    std::vector<Candidate> classifier;   // empty: wide-100, dropout 0.1
    TrainConfig train;
    std::uint64_t seed = 1;
};

struct ZiTrainResult {
    ZeroInflatedModel model;
    ProtocolResult conditional;
    ProtocolResult classifier;
    ZilnModel ziln;
    MetricReport ziln_conditional_test;
    MetricReport ziln_classifier_test;
};

ZiTrainResult train_zero_inflated(const FeatureTable& table, const SplitAssignment& split,
                                  const ZiTrainOptions& options);

struct ModelEvaluation {
    MetricReport conditional;
    MetricReport classifier;
    std::size_t floored = 0;
};

// Scores a model on table rows (all rows when `rows` is empty). Columns are
// matched by name.
ModelEvaluation evaluate_model(const ZeroInflatedModel& model, const FeatureTable& table,
                               std::span<const std::size_t> rows, Scope scope);
Matrix model_inputs(const ZeroInflatedModel& model, const FeatureTable& table, std::span<const std::size_t> rows);

}  // namespace zinn
