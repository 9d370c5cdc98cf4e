#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "klrhop/io.hpp"

namespace klrhop {
namespace {

namespace fs = std::filesystem;

class IoFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("klrhop_io_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

KlrModel trained() {
  const PatternSet ps = generate_patterns({20, 5, 0.1, 3});
  TrainConfig tc;
  tc.max_epochs = 200;
  tc.regularizer = Regularizer::Euclidean;
  return train_klr(ps, 0.037, tc, 3);
}

std::vector<CellRecord> sample_records() {
  std::vector<CellRecord> rs;
  for (int k = 0; k < 6; ++k) {
    CellRecord r;
    r.gamma = 0.001 * (k + 1) / 3.0;
    r.load = 0.1 * (k % 3 + 1);
    r.p_patterns = 10 * (k % 3 + 1);
    r.sharpness = 12.5 / (k + 1);
    r.log10_sharpness = std::log10(r.sharpness);
    r.fd_sq = 1.0 / 3.0 + k;
    r.fi_sq = 1e-9 * k;
    r.rho = -0.1 * k;
    r.stable_rank = 1.0 + k / 7.0;
    r.lambda_max = 3.25 * k;
    if (k % 2 == 0) r.spectrum_class = SpectrumShape::Concentrated;
    r.seed = 0xfedcba9876543210ULL + static_cast<std::uint64_t>(k);
    r.train_converged = k != 3;
    rs.push_back(r);
  }
  rs[4].failed = true;
  rs[4].train_converged = false;
  return rs;
}

TEST_F(IoFiles, ModelRoundTripIsBitExact) {
  const KlrModel m = trained();
  const fs::path p = dir_ / "m.json";
  save_model(m, p);
  const KlrModel back = load_model(p);
  EXPECT_EQ(back.dual.matrix(), m.dual.matrix());
  EXPECT_EQ(back.patterns, m.patterns);
  EXPECT_EQ(back.gamma(), m.gamma());
  EXPECT_EQ(back.config.seed, 3U);
  EXPECT_EQ(back.gram.matrix(), m.gram.matrix());
  EXPECT_EQ(back.train_config.regularizer, Regularizer::Euclidean);
  EXPECT_EQ(back.train_config.max_epochs, 200);
  EXPECT_EQ(back.train_meta.epochs, m.train_meta.epochs);
  EXPECT_EQ(back.train_meta.final_loss, m.train_meta.final_loss);
  EXPECT_EQ(back.train_meta.converged, m.train_meta.converged);
}

TEST(ModelJson, ShapeMismatchRejected) {
  auto j = model_to_json(trained());
  j["patterns"].push_back(j["patterns"][0]);
  EXPECT_THROW((void)model_from_json(j), DimensionMismatchError);
  auto k = model_to_json(trained());
  k["dual"].erase(0);
  EXPECT_THROW((void)model_from_json(k), DimensionMismatchError);
}

TEST(ModelJson, SchemaProblemsRejected) {
  auto j = model_to_json(trained());
  j["schema_version"] = 99;
  EXPECT_THROW((void)model_from_json(j), SchemaError);
  auto k = model_to_json(trained());
  k.erase("dual");
  EXPECT_THROW((void)model_from_json(k), SchemaError);
  auto l = model_to_json(trained());
  l["patterns"][0][0] = 3;
  EXPECT_THROW((void)model_from_json(l), SchemaError);
  EXPECT_THROW((void)model_from_json(nlohmann::json::array()), SchemaError);
}

TEST_F(IoFiles, MissingAndInvalidFiles) {
  EXPECT_THROW((void)load_model(dir_ / "absent.json"), MissingFileError);
  std::ofstream(dir_ / "bad.json") << "{ not json";
  EXPECT_THROW((void)load_model(dir_ / "bad.json"), SchemaError);
  EXPECT_THROW((void)read_records_csv(dir_ / "absent.csv"), MissingFileError);
  EXPECT_THROW(save_model(trained(), dir_ / "no" / "such" / "dir" / "m.json"), IoError);
}

TEST_F(IoFiles, CsvLayout) {
  const auto rs = sample_records();
  const fs::path p = dir_ / "r.csv";
  write_records_csv(rs, p);
  const std::string text = slurp(p);
  std::istringstream lines(text);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  ASSERT_EQ(all.size(), 7U);
  EXPECT_EQ(all[0], "gamma,load,p,sharpness,log10_sharpness,fd_sq,fi_sq,rho,stable_rank,lambda_max,spectrum_class,seed,converged");
  EXPECT_EQ(all[5], "0.0016666666666666668,0.20000000000000001,20,,,,,,,,," + std::to_string(rs[4].seed) + ",false");
  for (const auto& l : all) EXPECT_EQ(detail::split_csv_line(l).size(), 13U);
  EXPECT_THROW(write_records_csv({}, dir_ / "empty.csv"), ParameterError);
}

TEST_F(IoFiles, CsvRoundTrip) {
  const auto rs = sample_records();
  const fs::path p = dir_ / "r.csv";
  write_records_csv(rs, p);
  const auto back = read_records_csv(p);
  ASSERT_EQ(back.size(), rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k) {
    EXPECT_EQ(back[k].gamma, rs[k].gamma);
    EXPECT_EQ(back[k].load, rs[k].load);
    EXPECT_EQ(back[k].p_patterns, rs[k].p_patterns);
    EXPECT_EQ(back[k].failed, rs[k].failed);
    EXPECT_EQ(back[k].seed, rs[k].seed);
    EXPECT_EQ(back[k].train_converged, rs[k].train_converged);
    if (rs[k].failed) continue;
    EXPECT_EQ(back[k].sharpness, rs[k].sharpness);
    EXPECT_EQ(back[k].log10_sharpness, rs[k].log10_sharpness);
    EXPECT_EQ(back[k].fd_sq, rs[k].fd_sq);
    EXPECT_EQ(back[k].fi_sq, rs[k].fi_sq);
    EXPECT_EQ(back[k].rho, rs[k].rho);
    EXPECT_EQ(back[k].stable_rank, rs[k].stable_rank);
    EXPECT_EQ(back[k].lambda_max, rs[k].lambda_max);
    EXPECT_EQ(back[k].spectrum_class, rs[k].spectrum_class);
  }
  EXPECT_EQ(records_to_csv(back), slurp(p));
}

TEST_F(IoFiles, CsvBadHeader) {
  std::ofstream(dir_ / "h.csv") << "gamma,load\n0.1,0.2\n";
  EXPECT_THROW((void)read_records_csv(dir_ / "h.csv"), SchemaError);
}

}  // namespace
}  // namespace klrhop
