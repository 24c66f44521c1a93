// External evaluator stand-in: reads {"x":[...]} and answers with the metrics
// of a registry testbench, so runs through the evaluator hook can be compared
// with in-process runs.
//
//   mock_evaluator <testbench> [fail]
#include <iostream>
#include <iterator>
#include <string>

#include "json.hpp"

#include "cpn/testbench.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: mock_evaluator <testbench> [fail]\n";
    return 2;
  }
  if (argc > 2 && std::string(argv[2]) == "fail") return 4;
  const std::string input(std::istreambuf_iterator<char>(std::cin), {});
  const auto request = nlohmann::json::parse(input);
  const auto& tb = cpn::find_testbench(argv[1]);
  const auto x = request.at("x").get<std::vector<double>>();
  std::cout << nlohmann::json{{"metrics", cpn::to_metric_vector(tb.specs, cpn::evaluate_aligned(tb, x))}}.dump() << "\n";
  return 0;
}
