#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "cyclodet/partition.hpp"

using namespace cyclodet;

TEST_CASE("phase_of folds the global index onto the cycle") {
    CHECK(phase_of(1, 10) == 1);
    CHECK(phase_of(10, 10) == 10);
    CHECK(phase_of(11, 10) == 1);
    CHECK(phase_of(12, 10) == 2);
    CHECK(phase_of(1, 1) == 1);
    CHECK(phase_of(123456789, 1) == 1);
    // periodicity
    for (int64_t k = 1; k <= 30; ++k) {
        CHECK(phase_of(k, 7) == phase_of(k + 7, 7));
    }
}

TEST_CASE("batch_of maps times to their batch") {
    const BatchPartition p(10, {5, 10});
    CHECK(p.num_batches() == 2);
    CHECK(p.batch_of(7) == 1);   // phase 7 is in the second batch
    CHECK(p.batch_of(12) == 0);  // phase 2
    CHECK(p.batch_of(5) == 0);
    CHECK(p.batch_of(6) == 1);
    CHECK(p.batch_of_phase(1) == 0);
    CHECK(p.batch_of_phase(10) == 1);
    CHECK(p.batch_size(0) == 5);
    CHECK(p.batch_size(1) == 5);
}

TEST_CASE("day-scale partition") {
    const BatchPartition p(6598, {1500, 3000, 4500, 6598});
    CHECK(p.num_batches() == 4);
    CHECK(p.batch_size(0) == 1500);
    CHECK(p.batch_size(1) == 1500);
    CHECK(p.batch_size(2) == 1500);
    CHECK(p.batch_size(3) == 2098);
    // second day, phase 1501 -> second batch
    CHECK(p.batch_of(6598 + 1501) == 1);
    CHECK(p.batch_of(1) == 0);
    CHECK(p.batch_of(6598) == 3);
}

TEST_CASE("single batch covering the whole period") {
    const BatchPartition p(24, {24});
    CHECK(p.num_batches() == 1);
    CHECK(p.batch_size(0) == 24);
    for (int64_t k = 1; k <= 48; ++k) CHECK(p.batch_of(k) == 0);
}

TEST_CASE("partition validation") {
    CHECK_THROWS_AS(BatchPartition(0, {1}), std::invalid_argument);
    CHECK_THROWS_AS(BatchPartition(10, {}), std::invalid_argument);
    CHECK_THROWS_AS(BatchPartition(10, {5, 9}), std::invalid_argument);    // must end at T
    CHECK_THROWS_AS(BatchPartition(10, {5, 5, 10}), std::invalid_argument); // strictly increasing
    CHECK_THROWS_AS(BatchPartition(10, {0, 10}), std::invalid_argument);   // boundaries >= 1
    CHECK_THROWS_AS(BatchPartition(10, {7, 5, 10}), std::invalid_argument);
    CHECK_THROWS_AS(phase_of(0, 10), std::invalid_argument);
    CHECK_THROWS_AS(phase_of(5, 0), std::invalid_argument);
}

TEST_CASE("partition equality") {
    CHECK(BatchPartition(10, {5, 10}) == BatchPartition(10, {5, 10}));
    CHECK_FALSE(BatchPartition(10, {5, 10}) == BatchPartition(10, {4, 10}));
    CHECK_FALSE(BatchPartition(10, {10}) == BatchPartition(10, {5, 10}));
}
