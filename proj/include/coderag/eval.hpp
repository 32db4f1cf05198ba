#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coderag {

enum class Category {
    configuration,
    core_primitives,
    advanced_simulation,
    algorithmic,
    debugging,
};

const char* to_string(Category category);
Category category_from_string(const std::string& name);

enum class OutputKind { scalar, vector, text };

const char* to_string(OutputKind kind);
OutputKind output_kind_from_string(const std::string& name);

/// Precomputed ground truth (or a parsed transcript output) for one item.
struct ExpectedOutput {
    OutputKind kind = OutputKind::scalar;
    double scalar_value = 0.0;
    std::vector<double> vector_value;
    std::string text_value;
    double tolerance = 0.0;
};

struct BenchmarkItem {
    std::string item_id;
    std::string question;
    Category category = Category::configuration;
    ExpectedOutput ground_truth;
};

/// One generated-code execution record, produced outside the engine.
struct Transcript {
    std::string item_id;
    std::string stdout_text;
    std::string stderr_text;
    int exit_code = 0;
    std::optional<ExpectedOutput> parsed_output;
    std::optional<double> lint_score; // ingested, 0..10
};

enum class Outcome { correct, logical_error, hallucination, execution_error };

const char* to_string(Outcome outcome);

struct Verdict {
    std::string item_id;
    Outcome outcome = Outcome::execution_error;
    bool matched = false;
    std::optional<std::string> error_class;
};

struct ErrorClassification {
    bool is_error = false; // false when exit_code == 0
    Outcome outcome = Outcome::correct;
    std::optional<std::string> error_class;
};

/// Classify a nonzero-exit run from the final exception line of stderr.
/// AttributeError / ImportError / ModuleNotFoundError mark a structural
/// hallucination; any other recognizable exception is a logical error; no
/// recognizable exception means a plain execution error. Pure function of
/// (stderr, exit_code).
ErrorClassification classify_error(const std::string& stderr_text, int exit_code);

struct CompareResult {
    bool matched = false;
    std::string reason; // populated when matched == false
};

/// Scalar: |a-e| <= tolerance. Vector: length check then max elementwise
/// difference <= tolerance. Text: exact match after whitespace
/// normalization. Kind mismatch compares false with the reason recorded.
CompareResult compare_output(const ExpectedOutput& actual, const ExpectedOutput& expected);

/// Full per-item protocol: nonzero exit goes through classify_error; clean
/// exits are decided by output comparison.
Verdict evaluate_item(const BenchmarkItem& item, const Transcript& transcript);

struct CategoryStats {
    std::size_t n_items = 0;
    std::size_t correct = 0;
    std::size_t logical_error = 0;
    std::size_t hallucination = 0;
    std::size_t execution_error = 0;
    double accuracy = 0.0;
};

struct Report {
    std::size_t n_items = 0;
    double accuracy = 0.0;
    double logical_error_rate = 0.0;
    double hallucination_rate = 0.0;
    double execution_error_rate = 0.0;
    std::optional<double> mean_lint;
    std::map<std::string, CategoryStats> per_category;
};

/// Fold verdicts and transcripts into the aggregate report. Requires one
/// verdict per item; throws EvalError on an empty item set.
Report aggregate(const std::vector<BenchmarkItem>& items, const std::vector<Verdict>& verdicts,
                 const std::vector<Transcript>& transcripts);

// --- file formats ---

/// Dataset file: JSON array of {id, question, category, expected:{kind,
/// value, tolerance}}.
std::vector<BenchmarkItem> load_dataset(const std::filesystem::path& file);

/// One transcript JSON per item: {id, stdout, stderr, exit_code,
/// parsed_output?, lint_score?}. parsed_output accepts either an
/// ExpectedOutput-shaped object or a bare number/array/string.
Transcript load_transcript(const std::filesystem::path& file);

struct EvalRun {
    std::vector<Verdict> verdicts;
    Report report;
};

/// Evaluate every item against <transcripts_dir>/<item_id>.json. When
/// `sandbox_cmd` is non-empty it is treated as a command template with a
/// "{code}" placeholder: for items that ship a <item_id>.py code file
/// instead of a transcript, the command runs with the code path substituted
/// and must print the transcript JSON on stdout.
EvalRun run_eval(const std::vector<BenchmarkItem>& items,
                 const std::filesystem::path& transcripts_dir,
                 const std::string& sandbox_cmd = "");

std::string report_to_json(const Report& report);

/// Plot-ready rows: header plus one "model,config,accuracy,hallucination,lint"
/// line.
std::string report_to_csv(const Report& report, const std::string& model_label,
                          const std::string& config_label);

} // namespace coderag
