#include <catch2/catch_amalgamated.hpp>
#include "porolab/experiment.hpp"
#include "oracles.hpp"
TEST_CASE("placeholder") { CHECK(true); }
