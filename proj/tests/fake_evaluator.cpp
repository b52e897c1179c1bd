// Child process speaking the line-delimited JSON evaluator protocol.
//
//   fake_evaluator zdt1        builtin ZDT1
//   fake_evaluator echo K      first K decision values
//   fake_evaluator nan         replies with a bare "nan"
//   fake_evaluator nan-array   replies with [nan-string, 1]
//   fake_evaluator garbage     replies with non-JSON text
//   fake_evaluator arity       replies with three values
//   fake_evaluator text        replies with ["a","b"]
//   fake_evaluator exit        exits without replying
//   fake_evaluator silent      never replies
//   fake_evaluator bad-after N behaves like zdt1 for N requests, then replies "oops"

#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <string>
#include <thread>

#include "pups/problems.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "zdt1";
  const int param = argc > 2 ? std::stoi(argv[2]) : 2;
  std::string line;
  int served = 0;
  while (std::getline(std::cin, line)) {
    const auto x = nlohmann::json::parse(line).get<std::vector<double>>();
    ++served;
    if (mode == "zdt1" || (mode == "bad-after" && served <= param)) {
      std::cout << nlohmann::json(pups::eval_zdt1(x)).dump() << std::endl;
    } else if (mode == "echo") {
      std::cout << nlohmann::json(std::vector<double>(x.begin(), x.begin() + param)).dump() << std::endl;
    } else if (mode == "nan") {
      std::cout << "nan" << std::endl;
    } else if (mode == "nan-array") {
      std::cout << "[\"nan\", 1.0]" << std::endl;
    } else if (mode == "garbage" || mode == "bad-after") {
      std::cout << "oops" << std::endl;
    } else if (mode == "arity") {
      std::cout << "[1.0, 2.0, 3.0]" << std::endl;
    } else if (mode == "text") {
      std::cout << "[\"a\", \"b\"]" << std::endl;
    } else if (mode == "exit") {
      return 3;
    } else if (mode == "silent") {
      std::this_thread::sleep_for(std::chrono::seconds(30));
    }
  }
  return 0;
}
