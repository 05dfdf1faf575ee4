#include <exception>
#include <iostream>

#include "qaction/pipeline.hpp"

int main(int argc, char** argv) {
  try {
    qaction::RunConfig cfg = qaction::parse_cli(argc, argv);
    return qaction::run(cfg);
  } catch (const qaction::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const qaction::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
