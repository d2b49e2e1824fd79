#include "tailgen/journal.hpp"

#include <sstream>

#include "tailgen/errors.hpp"
#include "tailgen/hashing.hpp"

namespace tailgen {

namespace {

constexpr std::string_view kChainGenesis = "tailgen-journal-v1";

std::string chain_step(const std::string& prev, const std::string& fields) {
  std::uint64_t h = fnv1a(prev);
  h = fnv1a("\x1f", h);
  h = fnv1a(fields, h);
  return to_hex16(mix64(h));
}

std::string event_fields(const JournalEvent& ev) {
  std::ostringstream os;
  os << ev.seq << '\t' << ev.time_us << '\t' << ev.stage << '\t' << ev.entity << '\t'
     << ev.outcome << '\t' << ev.payload_hash;
  return os.str();
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto p = s.find('\t', start);
    if (p == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

}  // namespace

RunJournal::RunJournal(std::filesystem::path path, ClockPtr clock)
    : path_(std::move(path)), clock_(std::move(clock)),
      mu_(std::make_unique<std::mutex>()), chain_(to_hex16(mix64(fnv1a(kChainGenesis)))) {}

RunJournal RunJournal::open(const std::filesystem::path& path, ClockPtr clock) {
  if (!clock) throw ValidationError("journal requires a clock");
  RunJournal journal(path, std::move(clock));

  std::ifstream in(path);
  if (in) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_tabs(line);
      if (fields.size() != 7) {
        throw IntegrityError("journal line " + std::to_string(line_no) +
                                 ": expected 7 fields, got " + std::to_string(fields.size()),
                             line_no);
      }
      JournalEvent ev;
      try {
        ev.seq = std::stoll(fields[0]);
        ev.time_us = std::stoll(fields[1]);
      } catch (const std::exception&) {
        throw IntegrityError("journal line " + std::to_string(line_no) + ": bad numeric field",
                             line_no);
      }
      ev.stage = fields[2];
      ev.entity = fields[3];
      ev.outcome = fields[4];
      ev.payload_hash = fields[5];
      if (ev.seq != journal.next_seq_) {
        throw IntegrityError("journal line " + std::to_string(line_no) +
                                 ": sequence break (expected " +
                                 std::to_string(journal.next_seq_) + ")",
                             line_no);
      }
      std::string expect = chain_step(journal.chain_, event_fields(ev));
      if (fields[6] != expect) {
        throw IntegrityError("journal line " + std::to_string(line_no) +
                                 ": chain hash mismatch",
                             line_no);
      }
      journal.chain_ = expect;
      journal.events_.push_back(std::move(ev));
      ++journal.next_seq_;
    }
    in.close();
  }

  journal.out_.open(path, std::ios::app);
  if (!journal.out_) throw ValidationError("cannot open journal for append: " + path.string());
  return journal;
}

void RunJournal::append(const std::string& stage, const std::string& entity,
                        const std::string& outcome, const std::string& payload_hash) {
  std::lock_guard<std::mutex> lock(*mu_);
  JournalEvent ev;
  ev.seq = next_seq_++;
  ev.time_us = clock_->now().count();
  ev.stage = stage;
  ev.entity = entity.empty() ? "-" : entity;
  ev.outcome = outcome;
  ev.payload_hash = payload_hash.empty() ? "-" : payload_hash;

  std::string fields = event_fields(ev);
  chain_ = chain_step(chain_, fields);
  out_ << fields << '\t' << chain_ << '\n';
  out_.flush();
  events_.push_back(std::move(ev));
}

void RunJournal::seal_stage(const std::string& stage, const std::string& artifact_hash) {
  append(stage, "-", "sealed", artifact_hash);
}

std::string RunJournal::sealed_hash(const std::string& stage) const {
  std::lock_guard<std::mutex> lock(*mu_);
  for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
    if (it->stage == stage && it->outcome == "sealed") return it->payload_hash;
  }
  return {};
}

}  // namespace tailgen
