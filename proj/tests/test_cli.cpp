#include "bhull/io.hpp"
#include "bhull/lab.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace bhull;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
};

class Cli : public testing::Test {
 protected:
  void SetUp() override {
    const auto* info = testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(testing::TempDir()) / ("bhull_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliResult run(const std::string& args) const {
    const std::string log = path("stdout.txt");
    const std::string cmd = std::string("\"") + BHULL_CLI_PATH + "\" " + args + " > \"" + log + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream f(log);
    std::stringstream ss;
    ss << f.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
  }

  std::string read_file(const std::string& name) const {
    std::ifstream f(path(name), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  std::string write_instance(const ProblemInstance& inst) const {
    io::save_matrix_csv(path("B.csv"), inst.B().to_dense());
    io::save_matrix_csv(path("C.csv"), inst.C().to_dense());
    io::save_vector_csv(path("y.csv"), inst.y());
    io::save_vector_csv(path("t.csv"), inst.t());
    return "--b " + path("B.csv") + " --c " + path("C.csv") + " --t " + path("t.csv") + " --out-h " +
           path("h.csv") + " --out-m " + path("m.csv");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SolveNoiselessRoundTrip) {
  const auto inst = make_instance(30, 30, 50, 2, 4);
  const auto r = run("solve " + write_instance(inst) + " --y " + path("y.csv") + " --mode noiseless");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("converged=true"), std::string::npos);
  Solution sol;
  sol.h_hat = io::load_vector_csv(path("h.csv"));
  sol.m_hat = io::load_vector_csv(path("m.csv"));
  EXPECT_LT(recovery_error(sol, inst), 1e-6);
}

TEST_F(Cli, SolveInputErrors) {
  const auto inst = make_instance(10, 10, 20, 1, 4);
  const std::string base = write_instance(inst);
  EXPECT_EQ(run("solve " + base + " --mode noiseless").code, 1);  // no --y
  EXPECT_EQ(run("solve " + base + " --y " + path("y.csv") + " --mode bogus").code, 1);
  EXPECT_EQ(run("solve " + base + " --y " + path("missing.csv") + " --mode robust").code, 1);
  EXPECT_EQ(run("solve " + base + " --y " + path("y.csv") + " --mode tv").code, 1);  // no image shape
  EXPECT_EQ(run("").code, 1);
}

TEST_F(Cli, SolveReportsNonConvergence) {
  const auto inst = make_instance(30, 30, 50, 2, 4);
  const auto r = run("solve " + write_instance(inst) + " --y " + path("y.csv") + " --mode robust --iters 1");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("converged=false"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("h.csv")));
}

TEST_F(Cli, PhaseSeparatesRegimes) {
  const auto r = run("phase --n-list 100 --l-list 12,140 --trials 10 --seed 7 --out " + path("grid.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream f(path("grid.csv"));
  const auto cells = io::read_phase_csv(f);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_LE(cells[0].success_rate(), 0.2);
  EXPECT_GE(cells[1].success_rate(), 0.8);
}

TEST_F(Cli, PhaseIsDeterministic) {
  const std::string args = "phase --n-list 20 --l-list 8,40 --trials 3 --seed 3 --iters 2000 --out ";
  ASSERT_EQ(run(args + path("a.csv")).code, 0);
  ASSERT_EQ(run(args + path("b.csv") + " --threads 2").code, 0);
  EXPECT_EQ(read_file("a.csv"), read_file("b.csv"));
  EXPECT_FALSE(read_file("a.csv").empty());
}

TEST_F(Cli, PhaseZeroTrials) {
  ASSERT_EQ(run("phase --n-list 20 --l-list 8,40 --trials 0 --out " + path("z.csv")).code, 0);
  const std::string text = read_file("z.csv");
  EXPECT_NE(text.find("20,20,8,1,1,0,0,0\n"), std::string::npos) << text;
  EXPECT_NE(text.find("20,20,40,1,1,0,0,0\n"), std::string::npos) << text;
  EXPECT_EQ(run("phase --n-list 20,x --l-list 8 --out " + path("z.csv")).code, 1);
}

TEST_F(Cli, FlattenConstantImage) {
  io::save_pgm(path("in.pgm"), GrayImage::filled(10, 12, 90.0));
  const auto r = run("flatten --in " + path("in.pgm") + " --dict dct:3 --iters 500 --out " + path("out.pgm"));
  ASSERT_EQ(r.code, 0) << r.out;
  const GrayImage out = io::load_pgm(path("out.pgm"));
  EXPECT_EQ(out.p, 10);
  EXPECT_EQ(out.q, 12);
  EXPECT_EQ(out.pixels.maxCoeff(), out.pixels.minCoeff());
}

TEST_F(Cli, FlattenWritesImageForDistortedInput) {
  GrayImage img = GrayImage::filled(16, 16, 1.0);
  for (int r = 4; r < 12; ++r)
    for (int c = 3; c < 9; ++c) img.at(r, c) = 2.0;
  const Vector x = make_partial_dct(256, 3, 1) * (Vector(3) << 1.0, 0.3, -0.2).finished();
  img.pixels = rescale_to_byte_range(img.pixels.cwiseProduct(x));
  io::save_pgm(path("in.pgm"), img);
  const auto r = run("flatten --in " + path("in.pgm") + " --dict bessel:3 --iters 300 --out " +
                     path("out.pgm") + " --out-m " + path("m.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(io::load_pgm(path("out.pgm")).size(), 256);
  EXPECT_EQ(io::load_vector_csv(path("m.csv")).size(), 3);
}

TEST_F(Cli, FlattenRejectsBadDictionary) {
  io::save_pgm(path("in.pgm"), GrayImage::filled(4, 4, 90.0));
  io::save_matrix_csv(path("dict.csv"), Matrix::Ones(15, 2));
  EXPECT_EQ(run("flatten --in " + path("in.pgm") + " --dict file:" + path("dict.csv") + " --out " +
                path("o.pgm"))
                .code,
            1);
  EXPECT_EQ(run("flatten --in " + path("in.pgm") + " --dict fft:3 --out " + path("o.pgm")).code, 1);
  EXPECT_EQ(run("flatten --in " + path("nope.pgm") + " --dict dct:1 --out " + path("o.pgm")).code, 1);
}

TEST_F(Cli, ProjectExamples) {
  auto r = run("project --y 1 --s 1 --t 1 --point 0,0,0");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("point=(0.594604, 0.840896, 0.594604)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("case=4"), std::string::npos);

  r = run("project --y 1 --t 1 --point 2,1,0");
  EXPECT_NE(r.out.find("point=(2, 1, 0)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("case=1"), std::string::npos);

  r = run("project --y 0 --t 1 --point 3,-1,2");
  EXPECT_NE(r.out.find("point=(3, 0, 2)"), std::string::npos) << r.out;

  r = run("project --y 1 --t 1 --point 0,0");
  EXPECT_NE(r.out.find("point=(1, 1)"), std::string::npos) << r.out;

  EXPECT_EQ(run("project --y 1 --s -1 --t 1 --point 0,0").code, 1);
  EXPECT_EQ(run("project --y 1 --t 1 --point 0").code, 1);
}
