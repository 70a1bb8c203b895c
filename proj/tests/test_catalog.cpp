#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "moran/catalog.hpp"
#include "moran/dynamics.hpp"

using namespace moran;

TEST(Landscape, Matrices) {
  EXPECT_EQ(landscape_matrix(landscape::MoranR{2}).to_rows(), (Rows{{2, 2}, {1, 1}}));
  EXPECT_EQ(landscape_matrix(landscape::RSP{1, 1}).to_rows(), (Rows{{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}}));
  EXPECT_EQ(landscape_matrix(landscape::Neutral{3}).to_rows(), (Rows{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}));
  EXPECT_EQ(landscape_matrix(landscape::HawkDove{}).to_rows(), (Rows{{1, 2}, {2, 1}}));
  EXPECT_EQ(landscape_matrix(landscape::ZeroDiag{}).to_rows(), (Rows{{0, 1}, {1, 0}}));
  EXPECT_THROW(landscape_matrix(landscape::MoranR{0}), error);
  EXPECT_THROW(landscape_matrix(landscape::MoranR{-1}), error);
  EXPECT_EQ(landscape_name(landscape::HawkDove{}), "hawk_dove");
}

TEST(Landscape, RspIsCirculant) {
  for (double a : {-1.5, 0.0, 0.3, 2.0}) {
    for (double b : {-0.7, 1.0, 3.0}) {
      const auto A = landscape_matrix(landscape::RSP{a, b});
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(A((i + 1) % 3, (j + 1) % 3), A(i, j));
    }
  }
}

TEST(Landscape, NeutralGivesPhiEqualToShares) {
  const auto A = landscape_matrix(landscape::Neutral{4});
  for (const auto& a : SimplexLattice(4, 5).states()) {
    EXPECT_EQ(incentive_values(QReplicator{1}, A, a), a.distribution());
  }
}

TEST(LoadGameMatrix, Valid) {
  EXPECT_EQ(parse_game_matrix(R"({"n":2,"matrix":[[1,2],[2,1]]})").to_rows(),
            landscape_matrix(landscape::HawkDove{}).to_rows());
  EXPECT_EQ(parse_game_matrix(R"({"n":3,"matrix":[[0,-1,1],[1,0,-1],[-1,1,0]]})").to_rows(),
            landscape_matrix(landscape::RSP{1, 1}).to_rows());
  const auto A = landscape_matrix(landscape::RSP{0.25, 1.5});
  EXPECT_EQ(load_game_matrix(to_json(A)).to_rows(), A.to_rows());
}

TEST(LoadGameMatrix, SchemaErrorsCarryLocation) {
  auto message = [](const std::string& text) {
    try {
      parse_game_matrix(text);
    } catch (const error& e) {
      EXPECT_EQ(e.code(), errc::schema);
      return std::string(e.what());
    }
    ADD_FAILURE() << "accepted " << text;
    return std::string();
  };
  EXPECT_NE(message(R"({"n":2,"matrix":[[1,2,3],[4,5,6]]})").find("/matrix/0"), std::string::npos);
  EXPECT_NE(message(R"({"n":2,"matrix":[[1,2],[4,"x"]]})").find("/matrix/1/1"), std::string::npos);
  EXPECT_NE(message(R"({"n":3,"matrix":[[1,2],[4,5]]})").find("/matrix"), std::string::npos);
  EXPECT_NE(message(R"({"matrix":[[1]]})").find("/n"), std::string::npos);
  EXPECT_NE(message(R"([1,2])").find("/"), std::string::npos);
  EXPECT_NE(message("{not json").find("invalid JSON"), std::string::npos);
}

TEST(LoadGameMatrix, File) {
  const std::string path = ::testing::TempDir() + "moran_matrix.json";
  {
    std::ofstream out(path);
    out << R"({"n":2,"matrix":[[0,1],[1,0]]})";
  }
  EXPECT_EQ(load_game_matrix_file(path).to_rows(), landscape_matrix(landscape::ZeroDiag{}).to_rows());
  std::remove(path.c_str());
  try {
    load_game_matrix_file(path);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::io);
  }
}
