#pragma once

#include <string>
#include <utility>
#include <vector>

#include "skt/audit.hpp"
#include "skt/grid.hpp"
#include "skt/model.hpp"

namespace skt {

// 17 significant digits: doubles survive a text round trip unchanged.
std::string fmt17(double x);

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          int snapshot_every = 1);
void write_series_csv(const std::string& path, const std::vector<SeriesPoint>& series);
void write_balance_csv(const std::string& path, const EntropyBalanceTerms& terms);
void write_rows_csv(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& rows);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace skt
