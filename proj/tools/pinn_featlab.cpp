#include "featlab/cli/options.hpp"
#include "featlab/cli/run.hpp"

int main(int argc, char** argv) {
    auto outcome = featlab::cli::parse(argc, argv);
    if (!outcome.config) return outcome.status;
    return featlab::cli::run(*outcome.config);
}
