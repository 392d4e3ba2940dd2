#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skt/audit.hpp"
#include "skt/entropy.hpp"
#include "skt/grid.hpp"
#include "skt/model.hpp"
#include "skt/solver.hpp"

namespace skt {

// Plain-text run configuration: sectioned key = value lines with bracketed
// arrays, e.g.
//
//   seed = 7
//   [model]
//   n = 2
//   a = [[1.0, 0.5], [0.5, 1.0]]
//   ...
//
// Unknown sections or keys are rejected so typos fail loudly.
struct RunConfig {
  ModelSpec model;
  Grid grid;

  struct Time {
    double T = 1.0;
    double dt = 0.01;
    double newton_tol = 1e-10;
    int newton_max_iters = 25;
  } time;

  CutoffSpec cutoff;

  struct Initial {
    std::string mode = "constant";  // constant | manufactured
    std::vector<double> values;     // constant: one density per species
  } initial;

  struct Probe {
    std::string mode = "manufactured";  // manufactured | fine_proxy
    int refinement = 2;
    double perturbation = 0;
    std::vector<double> m, amp;         // manufactured parameters
    std::optional<double> tolerance;    // absent = derived from solver tolerances
  } probe;

  struct Audit {
    std::optional<double> window;     // balance window end; default T
    std::vector<int> levels;          // optional refinement ladder (cells per axis)
  } audit;

  struct Output {
    std::string dir = "out";
    int snapshot_every = 1;
  } output;

  // Sweep axes: dotted config key -> list of values, applied to probe runs.
  struct Sweep {
    std::vector<std::pair<std::string, std::vector<double>>> params;
  } sweep;

  std::uint64_t seed = 0;

  void validate() const;  // cross-field checks; throws InputError

  NewtonOptions newton_options() const;
  SimOptions sim_options() const;
  ProbeOptions probe_options() const;
  Field initial_field() const;

  static RunConfig parse_text(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string render() const;  // canonical text form; parse(render(c)) == c
};

}  // namespace skt
