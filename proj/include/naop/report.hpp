#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "naop/eval.hpp"

namespace naop {

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const LopoReport& report);
nlohmann::json to_json(const std::vector<LoooRow>& rows);
nlohmann::json to_json(const std::vector<TimeRow>& rows);
nlohmann::json to_json(const std::vector<FireRateRow>& rows);
nlohmann::json to_json(const std::vector<SweepRow>& rows);

std::string pr_csv(const EvalReport& report);
std::string folds_csv(const LopoReport& report);
std::string looo_csv(const std::vector<LoooRow>& rows);
std::string time_csv(const std::vector<TimeRow>& rows);
std::string fire_rate_csv(const std::vector<FireRateRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct PrCurve {
    std::string label;
    double ap = 0.0;
    std::vector<PRPoint> points;
};

/// Collects every PR curve found in a report document: a single EvalReport, a
/// LOPO report (one curve per fold), or an array of either.
std::vector<PrCurve> curves_from_json(const nlohmann::json& doc);

std::string render_pr_svg(const std::vector<PrCurve>& curves, int width = 640, int height = 480);
std::string curves_csv(const std::vector<PrCurve>& curves);

}  // namespace naop
