/** A trimmed snapshot of a question page: header, tagged question with its
 * own code block, and two answers with one code block each. Shapes and class
 * names follow the live site so the selectors under test are the real ones.
 */

export const QUESTION_PAGE = `
<div id="question-header">
  <h1 class="fs-headline1">How do I convert Y into an indicator matrix?</h1>
</div>
<div class="question" data-questionid="7141234">
  <div class="post-layout">
    <div class="votecell"><div class="js-vote-count">12</div></div>
    <div class="postcell">
      <div class="s-prose js-post-body">
        <p>My code raises an IndexError after splitting the data:</p>
        <pre><code>T1[i, Ytrain[i]] = 1</code></pre>
        <p>What am I doing wrong?</p>
      </div>
      <div class="post-taglist">
        <a class="post-tag">python</a>
        <a class="post-tag">numpy</a>
        <a class="post-tag">machine-learning</a>
      </div>
    </div>
  </div>
</div>
<div id="answers">
  <div class="answer js-answer accepted-answer" data-answerid="7141300">
    <div class="post-layout">
      <div class="votecell"><div class="js-vote-count">23</div></div>
      <div class="answercell">
        <div class="s-prose js-post-body">
          <p>Build the matrix with a loop:</p>
          <pre><code>K = 9
T1 = np.zeros((len(Ytrain), K))
for i in range(len(Ytrain)):
    T1[i, Ytrain[i]] = 1</code></pre>
        </div>
      </div>
    </div>
  </div>
  <div class="answer js-answer" data-answerid="7141987">
    <div class="post-layout">
      <div class="votecell"><div class="js-vote-count">4</div></div>
      <div class="answercell">
        <div class="s-prose js-post-body">
          <p>Or use fancy indexing:</p>
          <pre><code>T1 = np.eye(K)[Ytrain]</code></pre>
        </div>
      </div>
    </div>
  </div>
</div>
`;

export function loadFixture(html: string = QUESTION_PAGE): void {
  document.body.innerHTML = html;
}
