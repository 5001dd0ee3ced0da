#pragma once

#include <ostream>

#include "conrad/config.hpp"

namespace conrad::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPartial = 2;  // some records or combinations failed

// Each command validates its configuration first and throws conrad::Error on
// fatal problems. Progress goes to `log`.
int cmd_fixtures(const ExperimentConfig& config, std::ostream& log);

// Writes under paths.out: records/<id>.{cvol,cmask}.{json,raw},
// records/<id>.views.cvol.{json,raw} (32x32x3 axial/coronal/sagittal),
// records.json, summary.json, failures.json, labels.csv,
// annotated_biomarkers.csv and, when the classes allow it, folds.json.
int cmd_ingest(const ExperimentConfig& config, std::ostream& log);

// Writes paths.radiomics and `<paths.radiomics>.failures.json`.
int cmd_extract(const ExperimentConfig& config, std::ostream& log);

// Writes paths.fused and `<paths.fused>.sources.json`.
int cmd_fuse(const ExperimentConfig& config, std::ostream& log);

// Writes report.json, metrics.csv, roc.csv and folds.json under paths.out.
int cmd_evaluate(const ExperimentConfig& config, std::ostream& log);

// Runs every classifier x feature set into paths.out/runs/<classifier>__<set>/
// and consolidates paths.out/matrix.csv. Combinations whose report already
// exists for the same seed are reused.
int cmd_matrix(const ExperimentConfig& config, std::ostream& log);

int run_command(Command command, const ExperimentConfig& config, std::ostream& log);

}  // namespace conrad::cli
