#include "hallucount/facts/prompts.hpp"

#include <array>
#include <cctype>

#include "hallucount/core/error.hpp"

namespace hallucount::facts {

std::string PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
  std::string out;
  out.reserve(text.size() + 256);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        const std::string name(text.substr(i + 1, j - i - 1));
        auto it = vars.find(name);
        if (it == vars.end()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "template " + std::string(id) + " needs placeholder {" + name + "}");
        }
        out.append(it->second);
        i = j + 1;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

namespace templates {

const PromptTemplate kExtractFacts{"extract-facts/v1", R"(You are extracting facts from the {source_kind} of a clinician-patient encounter.

Decompose the text into concise, atomic, standalone facts. Each fact states exactly one claim and must be understandable without the surrounding text. Split compound statements into separate facts; for example "Patient is a 62-year-old female with type 2 diabetes" becomes "Patient is 62 years old", "Patient is female" and "Patient has type 2 diabetes". Do not merge claims with "and".

Label every fact with exactly one category from this list:
Age & Sex, Exam Findings, Treatment Plan, Symptoms, Labs & Imaging, Medical History, Diagnosis

Output one JSON object per line and nothing else:
{"fact": "<fact text>", "category": "<category>"}
If the text states no facts, output the single word NONE.

<document>
{document}
</document>
)"};

const PromptTemplate kRepairFactList{"repair-fact-list/v1", R"(The text below was supposed to be a list of facts, one JSON object per line, but it could not be parsed (attempt {attempt} of {max_attempts}).

Re-emit the same facts without adding, removing or rewording any of them. Output one JSON object per line and nothing else:
{"fact": "<fact text>", "category": "<category>"}
Keep any "rationale" field that was present. The category must be one of: Age & Sex, Exam Findings, Treatment Plan, Symptoms, Labs & Imaging, Medical History, Diagnosis.

<text>
{raw}
</text>
)"};

const PromptTemplate kSinglePromptCount{"single-prompt-count/v1", R"(Compare the summary against the transcript of a clinician-patient encounter.

Count the statements in the summary that are hallucinated: information that is not present in the transcript or that misrepresents it. Ignore minor discrepancies that do not change clinical meaning, such as a missing last name or a reworded phrase.

Reply with a single non-negative integer and nothing else.

<transcript>
{transcript}
</transcript>

<summary>
{summary}
</summary>
)"};

const PromptTemplate kRepairCount{"repair-count/v1", R"(The reply below should have been a single non-negative integer counting hallucinated statements, but no integer could be read from it (attempt {attempt} of {max_attempts}).

Reply with that count as digits only.

<reply>
{raw}
</reply>
)"};

const PromptTemplate kSinglePromptList{"single-prompt-list/v1", R"(Compare the summary against the transcript of a clinician-patient encounter.

List every atomic fact stated in the summary that is not supported by the transcript. Ignore minor discrepancies that do not change clinical meaning, such as a missing last name or a reworded phrase.

Output one JSON object per line and nothing else:
{"fact": "<unsupported fact>", "category": "<category>", "rationale": "<why it is unsupported>"}
The category must be one of: Age & Sex, Exam Findings, Treatment Plan, Symptoms, Labs & Imaging, Medical History, Diagnosis.
If every fact is supported, output the single word NONE.

<transcript>
{transcript}
</transcript>

<summary>
{summary}
</summary>
)"};

const PromptTemplate kAlignFacts{"align-facts/v1", R"(Below are two numbered lists of facts: one extracted from the transcript of a clinician-patient encounter and one extracted from its summary.

For each summary fact, decide whether the transcript facts support it. Ignore minor discrepancies that do not change clinical meaning.

Output one JSON object per line for every summary fact that is NOT supported, copying the fact id and text exactly:
{"id": "<summary fact id>", "fact": "<summary fact text>", "rationale": "<why it is unsupported>"}
If every summary fact is supported, output the single word NONE.

<transcript_facts>
{transcript_facts}
</transcript_facts>

<summary_facts>
{summary_facts}
</summary_facts>
)"};

const PromptTemplate kRepairUnsupportedList{"repair-unsupported-list/v1", R"(The reply below should have listed unsupported summary facts, one JSON object per line, but it could not be parsed (attempt {attempt} of {max_attempts}).

Re-emit the same facts without adding or removing any. Output one JSON object per line and nothing else:
{"id": "<summary fact id>", "fact": "<summary fact text>", "rationale": "<why it is unsupported>"}
If the reply says every fact is supported, output the single word NONE.

<reply>
{raw}
</reply>
)"};

const PromptTemplate kTranscriptLookup{"transcript-lookup/v1", R"(Below is the full transcript of a clinician-patient encounter and a numbered list of facts extracted from its summary.

For each summary fact, decide whether the transcript supports it, using the surrounding context of the conversation. Ignore minor discrepancies that do not change clinical meaning.

Output one JSON object per line for every summary fact that is NOT supported, copying the fact id and text exactly:
{"id": "<summary fact id>", "fact": "<summary fact text>", "rationale": "<why it is unsupported>"}
If every summary fact is supported, output the single word NONE.

<transcript>
{transcript}
</transcript>

<summary_facts>
{summary_facts}
</summary_facts>
)"};

const PromptTemplate kRewriteTranscript{"rewrite-transcript/v1", R"(Rewrite the transcript of a clinician-patient encounter so that it no longer mentions any of the facts listed below.

Remove or replace every occurrence of each listed fact, including indirect references, while keeping the meaning and natural flow of the rest of the conversation. Do not touch lines that do not mention a listed fact. Keep one line per speaker turn, in the original order and format.

Output only the rewritten transcript.

<facts>
{facts}
</facts>

<transcript>
{transcript}
</transcript>
)"};

}  // namespace templates

std::span<const PromptTemplate* const> all_templates() {
  static constexpr std::array<const PromptTemplate*, 9> kAll = {
      &templates::kExtractFacts,     &templates::kRepairFactList, &templates::kSinglePromptCount,
      &templates::kRepairCount,      &templates::kSinglePromptList, &templates::kAlignFacts,
      &templates::kRepairUnsupportedList,
      &templates::kTranscriptLookup, &templates::kRewriteTranscript,
  };
  return kAll;
}

const PromptTemplate& template_by_id(std::string_view id) {
  for (const PromptTemplate* t : all_templates()) {
    if (t->id == id) return *t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown prompt template '" + std::string(id) + "'");
}

}  // namespace hallucount::facts
